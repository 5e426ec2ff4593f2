use std::ffi::{CStr, CString};
use std::ptr;

use serde_json::Value;
use slicecalc_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn take(p: *mut std::ffi::c_char) -> Value {
    assert!(!p.is_null());
    let v = serde_json::from_str(unsafe { CStr::from_ptr(p) }.to_str().unwrap()).unwrap();
    unsafe { sc_string_free(p) };
    v
}

fn operator(json: &str) -> *mut ScOperator {
    let mut op = ptr::null_mut();
    let text = cstr(json);
    assert_eq!(
        unsafe { sc_operator_from_json(text.as_ptr(), &mut op) },
        ScStatus::Ok
    );
    op
}

const DIAG: &str = r#"{"n": 2, "entries": [["2+e1", "0"], ["0", "-2+e1"]]}"#;

#[test]
fn handle_round_trip_and_shape() {
    let op = operator(DIAG);
    let (mut n, mut d) = (0usize, 0usize);
    assert_eq!(
        unsafe { sc_operator_shape(op, &mut n, &mut d) },
        ScStatus::Ok
    );
    assert_eq!((n, d), (2, 2));
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sc_operator_to_json(op, &mut out) }, ScStatus::Ok);
    let v = take(out);
    assert_eq!(v["d"], 2);
    let again = operator(&v.to_string());
    unsafe {
        sc_operator_free(again);
        sc_operator_free(op);
        sc_operator_free(ptr::null_mut());
    }
}

#[test]
fn spectrum_and_certificate() {
    let op = operator(DIAG);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sc_spectrum_json(op, &mut out) }, ScStatus::Ok);
    let v = take(out);
    assert_eq!(v["spheres"].as_array().unwrap().len(), 2);
    assert_eq!(unsafe { sc_certify_json(op, 0.8, &mut out) }, ScStatus::Ok);
    assert_eq!(take(out)["passed"], true);
    unsafe { sc_operator_free(op) };
}

#[test]
fn calc_matches_scalar_value() {
    let op = operator(r#"{"n": 1, "entries": [["2"]]}"#);
    let f = cstr("rat:[0,1]/[1,0,2,0,1]");
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { sc_calc_json(op, f.as_ptr(), ScSide::Left, 0.8, 1e-12, &mut out) },
        ScStatus::Ok
    );
    let v = take(out);
    let x = v["operator"]["entries"][0][0]["coeffs"][0]
        .as_f64()
        .unwrap();
    assert!((x - 2.0 / 25.0).abs() < 1e-12);
    unsafe { sc_operator_free(op) };
}

#[test]
fn hinf_right_returns_provenance() {
    let op = operator(r#"{"n": 2, "entries": [["2"]]}"#);
    let f = cstr("poly:[0,e2]:right");
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { sc_hinf_json(op, f.as_ptr(), ScSide::Right, 0, 0.8, 1e-10, &mut out) },
        ScStatus::Ok
    );
    let v = take(out);
    assert_eq!(v["provenance"]["m"], 2);
    let e2 = v["operator"]["entries"][0][0]["coeffs"][2]
        .as_f64()
        .unwrap();
    assert!((e2 - 2.0).abs() < 1e-8);
    unsafe { sc_operator_free(op) };
}

#[test]
fn errors_set_status_and_message() {
    let mut op = ptr::null_mut();
    let bad = cstr("{not json");
    assert_eq!(
        unsafe { sc_operator_from_json(bad.as_ptr(), &mut op) },
        ScStatus::Parse
    );
    let msg = unsafe { CStr::from_ptr(sc_last_error()) }
        .to_str()
        .unwrap()
        .to_owned();
    assert!(msg.contains("operator file"));
    assert_eq!(
        unsafe { sc_operator_from_json(ptr::null(), &mut op) },
        ScStatus::NullPointer
    );

    let singular = operator(r#"{"n": 1, "entries": [["0", "0"], ["0", "2"]]}"#);
    let f = cstr("poly:[0,1]");
    let mut out = ptr::null_mut();
    let status =
        unsafe { sc_hinf_json(singular, f.as_ptr(), ScSide::Left, 0, 0.8, 1e-10, &mut out) };
    assert_eq!(status, ScStatus::NotInjective);
    assert!(out.is_null());
    let ok = unsafe { sc_spectrum_json(singular, &mut out) };
    assert_eq!(ok, ScStatus::Ok);
    take(out);
    assert!(sc_last_error().is_null());
    unsafe { sc_operator_free(singular) };
}

#[test]
fn verify_reports_pass_flag() {
    let cfg = cstr(
        r#"{"generator": {"kind": "DiagonalModel", "params": {}}, "n": 1, "d": 2,
            "sector": {"omega": 0.5, "phi": 0.8, "theta": 1.2},
            "suites": ["algebra"], "seed": 1, "operators": 1, "timing": false}"#,
    );
    let mut out = ptr::null_mut();
    let mut passed = -1;
    assert_eq!(
        unsafe { sc_verify_json(cfg.as_ptr(), &mut out, &mut passed) },
        ScStatus::Ok
    );
    assert_eq!(passed, 1);
    assert_eq!(take(out)["summary"]["failed"], 0);
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(sc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
