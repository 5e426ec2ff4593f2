//! C ABI over `slicecalc`.
//!
//! Operators live behind an opaque [`ScOperator`] handle. Every fallible call
//! returns an [`ScStatus`]; on failure the message is available from
//! [`sc_last_error`] on the same thread. Results are JSON strings owned by
//! the caller and released with [`sc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use serde_json::json;
use slicecalc::calculus::{
    certify_bisectorial, omega_calc_detailed, s_spectrum, CertificationGrid, ContourSpec,
    SectorSpec,
};
use slicecalc::harness::run_suite;
use slicecalc::hinfinity::{hinf_left, hinf_right};
use slicecalc::scenario::{parse_function, parse_operator, ScenarioConfig};
use slicecalc::slice::Side;
use slicecalc::{Error, ImaginaryUnit, RightLinearOperator};

/// Opaque operator handle.
pub struct ScOperator {
    inner: RightLinearOperator,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidParameter = 4,
    DimensionMismatch = 5,
    Singular = 6,
    NotInjective = 7,
    CertificationFailed = 8,
    Domain = 9,
    QuadratureNotConverged = 10,
    Io = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScSide {
    Left = 0,
    Right = 1,
}

impl From<ScSide> for Side {
    fn from(s: ScSide) -> Self {
        match s {
            ScSide::Left => Side::Left,
            ScSide::Right => Side::Right,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> ScStatus {
    match e {
        Error::Parse(_) => ScStatus::Parse,
        Error::InvalidParameter(_) | Error::UnsupportedDimension(_) | Error::UnclassifiedGrowth => {
            ScStatus::InvalidParameter
        }
        Error::DimensionMismatch(_) | Error::FlavorMismatch(_) | Error::NonSubmoduleDomain(_) => {
            ScStatus::DimensionMismatch
        }
        Error::SingularOperator { .. } | Error::SInSpectrum { .. } | Error::EigenNonConvergence => {
            ScStatus::Singular
        }
        Error::NotInjective(_) => ScStatus::NotInjective,
        Error::CertificationFailed(_) | Error::SpectrumOutsideSector { .. } => {
            ScStatus::CertificationFailed
        }
        Error::DomainViolation(_) | Error::ZeroInSector { .. } | Error::NonDecayingFunction => {
            ScStatus::Domain
        }
        Error::QuadratureNotConverged { .. } => ScStatus::QuadratureNotConverged,
        Error::Io(_) => ScStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into a status and a thread-local
/// message.
fn guard(f: impl FnOnce() -> Result<(), ScStatus>) -> ScStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ScStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            ScStatus::Panic
        }
    }
}

fn fail(e: Error) -> ScStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, ScStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(ScStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        ScStatus::InvalidUtf8
    })
}

unsafe fn read_op<'a>(op: *const ScOperator) -> Result<&'a RightLinearOperator, ScStatus> {
    if op.is_null() {
        set_error("null operator handle");
        return Err(ScStatus::NullPointer);
    }
    Ok(&(*op).inner)
}

unsafe fn write_string(out: *mut *mut c_char, text: String) -> Result<(), ScStatus> {
    if out.is_null() {
        set_error("null output pointer");
        return Err(ScStatus::NullPointer);
    }
    let c = CString::new(text).map_err(|_| {
        set_error("output contains a NUL byte");
        ScStatus::Panic
    })?;
    *out = c.into_raw();
    Ok(())
}

fn contour(t: &RightLinearOperator, phi: f64, tol: f64) -> Result<ContourSpec, ScStatus> {
    let sector = SectorSpec::around(phi, None).map_err(fail)?;
    let j = ImaginaryUnit::basis(t.n(), 1).map_err(fail)?;
    let cfg = ContourSpec::new(sector, j).with_tol(tol);
    cfg.validate().map_err(fail)?;
    Ok(cfg)
}

/// Parses an operator from JSON (serialized or literal-row form).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_operator_from_json(
    json: *const c_char,
    out: *mut *mut ScOperator,
) -> ScStatus {
    guard(|| {
        let text = read_str(json)?;
        if out.is_null() {
            set_error("null output pointer");
            return Err(ScStatus::NullPointer);
        }
        let inner = parse_operator(text).map_err(fail)?;
        *out = Box::into_raw(Box::new(ScOperator { inner }));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `op` must come from [`sc_operator_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sc_operator_free(op: *mut ScOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Algebra dimension `n` and module rank `d`.
///
/// # Safety
/// `op` must be a live handle; `n` and `d` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sc_operator_shape(
    op: *const ScOperator,
    n: *mut usize,
    d: *mut usize,
) -> ScStatus {
    guard(|| {
        let t = read_op(op)?;
        if n.is_null() || d.is_null() {
            set_error("null output pointer");
            return Err(ScStatus::NullPointer);
        }
        *n = t.n();
        *d = t.d();
        Ok(())
    })
}

/// Serialized operator.
///
/// # Safety
/// `op` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_operator_to_json(
    op: *const ScOperator,
    out: *mut *mut c_char,
) -> ScStatus {
    guard(|| {
        let t = read_op(op)?;
        write_string(out, serde_json::to_string(t).map_err(|e| fail(e.into()))?)
    })
}

/// S-spectrum as `{"spheres": [{"center", "radius"}], "injective"}`.
///
/// # Safety
/// `op` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_spectrum_json(
    op: *const ScOperator,
    out: *mut *mut c_char,
) -> ScStatus {
    guard(|| {
        let t = read_op(op)?;
        let spheres = s_spectrum(t).map_err(fail)?;
        write_string(
            out,
            json!({ "spheres": spheres, "injective": t.is_injective() }).to_string(),
        )
    })
}

/// Resolvent certificate outside the double sector of angle `phi`.
///
/// # Safety
/// `op` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_certify_json(
    op: *const ScOperator,
    phi: f64,
    out: *mut *mut c_char,
) -> ScStatus {
    guard(|| {
        let t = read_op(op)?;
        let cert =
            certify_bisectorial(t, phi, &CertificationGrid::standard(t.n())).map_err(fail)?;
        write_string(
            out,
            json!({
                "phi": cert.phi,
                "c_phi": cert.c_phi,
                "samples": cert.samples.len(),
                "passed": cert.passed,
                "injective": cert.injective,
                "failure": cert.failure,
            })
            .to_string(),
        )
    })
}

/// Contour-integral calculus of the decaying function `fn_id`; writes the
/// resulting operator.
///
/// # Safety
/// `op` must be a live handle, `fn_id` a NUL-terminated string and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_calc_json(
    op: *const ScOperator,
    fn_id: *const c_char,
    side: ScSide,
    phi: f64,
    tol: f64,
    out: *mut *mut c_char,
) -> ScStatus {
    guard(|| {
        let t = read_op(op)?;
        let id = read_str(fn_id)?;
        let cfg = contour(t, phi, tol)?;
        let f = parse_function(t.n(), id, cfg.sector.theta).map_err(fail)?;
        let r = omega_calc_detailed(&f, t, &cfg, side.into()).map_err(fail)?;
        write_string(
            out,
            json!({ "operator": r.operator, "panels": r.panels, "last_change": r.change })
                .to_string(),
        )
    })
}

/// Regularized calculus of `fn_id`; `m = 0` picks the regularizer exponent
/// automatically.
///
/// # Safety
/// `op` must be a live handle, `fn_id` a NUL-terminated string and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_hinf_json(
    op: *const ScOperator,
    fn_id: *const c_char,
    side: ScSide,
    m: u32,
    phi: f64,
    tol: f64,
    out: *mut *mut c_char,
) -> ScStatus {
    guard(|| {
        let t = read_op(op)?;
        let id = read_str(fn_id)?;
        let cfg = contour(t, phi, tol)?;
        let f = parse_function(t.n(), id, cfg.sector.theta).map_err(fail)?;
        let m = (m > 0).then_some(m);
        let value = match side {
            ScSide::Left => json!({ "operator": hinf_left(&f, t, &cfg, m).map_err(fail)? }),
            ScSide::Right => {
                let r = hinf_right(&f, t, &cfg, m).map_err(fail)?;
                json!({ "operator": r.as_operator, "relation": r.relation, "provenance": r.provenance })
            }
        };
        write_string(out, value.to_string())
    })
}

/// Runs a scenario; `passed` (nullable) receives 1 when no check failed.
///
/// # Safety
/// `config_json` must be a NUL-terminated string, `out` a valid pointer and
/// `passed` null or valid.
#[no_mangle]
pub unsafe extern "C" fn sc_verify_json(
    config_json: *const c_char,
    out: *mut *mut c_char,
    passed: *mut i32,
) -> ScStatus {
    guard(|| {
        let cfg = ScenarioConfig::from_json(read_str(config_json)?).map_err(fail)?;
        let report = run_suite(&cfg).map_err(fail)?;
        if !passed.is_null() {
            *passed = i32::from(report.passed());
        }
        write_string(
            out,
            serde_json::to_string(&report).map_err(|e| fail(e.into()))?,
        )
    })
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call on the same thread.
#[no_mangle]
pub extern "C" fn sc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn sc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
