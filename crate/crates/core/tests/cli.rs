use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn slicecalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slicecalc"))
        .args(args)
        .env("SLICECALC_THREADS", "2")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn entry(v: &Value, k: usize) -> f64 {
    v["operator"]["entries"][0][0]["coeffs"][k]
        .as_f64()
        .unwrap()
}

#[test]
fn spectrum_lists_spheres() {
    let dir = tempfile::tempdir().unwrap();
    let op = write(
        dir.path(),
        "op.json",
        r#"{"n": 2, "entries": [["2+e1", "1"], ["0", "-3"]]}"#,
    );
    let v = json(&slicecalc(&["spectrum", &op]));
    let spheres = v["spheres"].as_array().unwrap();
    assert_eq!(spheres.len(), 2);
    assert!((spheres[0]["center"].as_f64().unwrap() + 3.0).abs() < 1e-9);
    assert!((spheres[1]["radius"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn calc_and_hinf_evaluate_scalar_operators() {
    let dir = tempfile::tempdir().unwrap();
    let op = write(dir.path(), "op.json", r#"{"n": 1, "entries": [["2"]]}"#);
    let v = json(&slicecalc(&[
        "calc",
        &op,
        "--f",
        "rat:[0,1]/[1,0,2,0,1]",
        "--side",
        "right",
    ]));
    assert!((entry(&v, 0) - 0.08).abs() < 1e-10);

    let v = json(&slicecalc(&[
        "hinf",
        &op,
        "--f",
        "poly:[1,0,1]",
        "--side",
        "left",
        "--m",
        "3",
    ]));
    assert!((entry(&v, 0) - 5.0).abs() < 1e-8);
    assert_eq!(v["provenance"]["m"], 3);
    assert!(v["discrepancy"]["regularizer_paths"].as_f64().unwrap() < 1e-8);

    let v = json(&slicecalc(&["hinf", &op, "--f", "rat:[0,0,1]/[4,0,1]"]));
    assert!((entry(&v, 0) - 0.5).abs() < 1e-8);
    assert!(v["discrepancy"]["rational_routes"].as_f64().unwrap() < 1e-7);
}

#[test]
fn certify_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let op = write(
        dir.path(),
        "op.json",
        r#"{"n": 1, "entries": [["1+0.5e1"]]}"#,
    );
    let csv = dir.path().join("profile.csv");
    let v = json(&slicecalc(&[
        "certify",
        &op,
        "--phi",
        "0.8",
        "--profile",
        csv.to_str().unwrap(),
    ]));
    assert_eq!(v["passed"], true);
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("abs_s,angle,scaled_norm\n"));
    assert_eq!(
        text.lines().count() as u64,
        v["samples"].as_u64().unwrap() + 1
    );
}

#[test]
fn verify_writes_reports_and_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"generator": {"kind": "SimilarityModel", "params": {"spread": 0.3}}, "n": 1, "d": 2,
            "sector": {"omega": 0.5, "phi": 0.8, "theta": 1.2},
            "suites": ["resolvent", "hinfty-left"], "seed": 5, "operators": 1}"#,
    );
    let out_path = dir.path().join("report.json");
    let csv_path = dir.path().join("report.csv");
    let out = slicecalc(&[
        "verify",
        "--config",
        &cfg,
        "--out",
        out_path.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(report["summary"]["failed"], 0);
    assert_eq!(report["rng"], "chacha8-v1");
    assert!(std::fs::read_to_string(csv_path)
        .unwrap()
        .starts_with("name,suite,anchor,status"));
}

#[test]
fn bad_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = slicecalc(&[
        "spectrum",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let op = write(
        dir.path(),
        "op.json",
        r#"{"n": 1, "entries": [["0", "1"], ["0", "0"]]}"#,
    );
    let out = slicecalc(&["hinf", &op, "--f", "poly:[0,1]"]);
    assert_eq!(out.status.code(), Some(1));
    let out = slicecalc(&["calc", &op, "--f", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dirac_demo_reports_certificate() {
    let v = json(&slicecalc(&[
        "demo",
        "dirac",
        "--points",
        "6",
        "--amplitude",
        "0.2",
    ]));
    assert_eq!(v["spectrum"]["d"], 6);
    assert_eq!(v["spectrum"]["injective"], false);
    assert!(v["certificate"]["passed"].is_boolean());
}
