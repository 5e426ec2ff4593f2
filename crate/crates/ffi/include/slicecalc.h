#ifndef SLICECALC_H
#define SLICECALC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum ScStatus {
  SC_STATUS_OK = 0,
  SC_STATUS_NULL_POINTER = 1,
  SC_STATUS_INVALID_UTF8 = 2,
  SC_STATUS_PARSE = 3,
  SC_STATUS_INVALID_PARAMETER = 4,
  SC_STATUS_DIMENSION_MISMATCH = 5,
  SC_STATUS_SINGULAR = 6,
  SC_STATUS_NOT_INJECTIVE = 7,
  SC_STATUS_CERTIFICATION_FAILED = 8,
  SC_STATUS_DOMAIN = 9,
  SC_STATUS_QUADRATURE_NOT_CONVERGED = 10,
  SC_STATUS_IO = 11,
  SC_STATUS_PANIC = 12,
} ScStatus;

typedef enum ScSide {
  SC_SIDE_LEFT = 0,
  SC_SIDE_RIGHT = 1,
} ScSide;

/*
 Opaque operator handle.
 */
typedef struct ScOperator ScOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses an operator from JSON (serialized or literal-row form).

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ScStatus sc_operator_from_json(const char *json, struct ScOperator **out);

/*
 Releases a handle; null is ignored.

 # Safety
 `op` must come from [`sc_operator_from_json`] and not be used afterwards.
 */
void sc_operator_free(struct ScOperator *op);

/*
 Algebra dimension `n` and module rank `d`.

 # Safety
 `op` must be a live handle; `n` and `d` valid pointers.
 */
enum ScStatus sc_operator_shape(const struct ScOperator *op, size_t *n, size_t *d);

/*
 Serialized operator.

 # Safety
 `op` must be a live handle and `out` a valid pointer.
 */
enum ScStatus sc_operator_to_json(const struct ScOperator *op, char **out);

/*
 S-spectrum as `{"spheres": [{"center", "radius"}], "injective"}`.

 # Safety
 `op` must be a live handle and `out` a valid pointer.
 */
enum ScStatus sc_spectrum_json(const struct ScOperator *op, char **out);

/*
 Resolvent certificate outside the double sector of angle `phi`.

 # Safety
 `op` must be a live handle and `out` a valid pointer.
 */
enum ScStatus sc_certify_json(const struct ScOperator *op, double phi, char **out);

/*
 Contour-integral calculus of the decaying function `fn_id`; writes the
 resulting operator.

 # Safety
 `op` must be a live handle, `fn_id` a NUL-terminated string and `out` a
 valid pointer.
 */
enum ScStatus sc_calc_json(const struct ScOperator *op,
                           const char *fn_id,
                           enum ScSide side,
                           double phi,
                           double tol,
                           char **out);

/*
 Regularized calculus of `fn_id`; `m = 0` picks the regularizer exponent
 automatically.

 # Safety
 `op` must be a live handle, `fn_id` a NUL-terminated string and `out` a
 valid pointer.
 */
enum ScStatus sc_hinf_json(const struct ScOperator *op,
                           const char *fn_id,
                           enum ScSide side,
                           uint32_t m,
                           double phi,
                           double tol,
                           char **out);

/*
 Runs a scenario; `passed` (nullable) receives 1 when no check failed.

 # Safety
 `config_json` must be a NUL-terminated string, `out` a valid pointer and
 `passed` null or valid.
 */
enum ScStatus sc_verify_json(const char *config_json, char **out, int32_t *passed);

/*
 Message of the last failed call on this thread, or null. Valid until
 the next call on the same thread.
 */
const char *sc_last_error(void);

/*
 Releases a string returned by this library; null is ignored.

 # Safety
 `s` must come from this library and not be used afterwards.
 */
void sc_string_free(char *s);

/*
 Library version, statically allocated.
 */
const char *sc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLICECALC_H */
