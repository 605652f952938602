use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(sub: &str, config: &str, dir: &Path) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_phipower"))
        .args([sub, "--config", cfg.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()])
        .env_remove("PHIPOWER_TOL_IDENTITY")
        .env_remove("PHIPOWER_EPSILON")
        .env_remove("PHIPOWER_SERIES_TOL")
        .env_remove("PHIPOWER_ROOT_TOL")
        .output()
        .unwrap()
}

const UNIT: &str = r#"{"interval": {"a": 0, "b": 1}, "grid_size": 129, "x0": 0,
  "phi": {"kind": "constant", "value": 1}, "verify": {"spectra": false, "kernel_nodes": 65}}"#;

const BOX: &str = r#"{"interval": {"a": 0, "b": 3.141592653589793}, "grid_size": 1025, "x0": 0,
  "eigen": {"problem": {"kind": "schrodinger", "potential": {"kind": "constant", "value": 0},
                        "psi0": {"kind": "constant", "value": 1}},
            "range": [0.5, 26], "count": 5}}"#;

const SQUARE: &str = r#"{"interval": {"a": 0, "b": 1}, "grid_size": 257, "x0": 0,
  "phi": {"kind": "shifted_square"}, "taylor": {"f": {"kind": "sin"}, "order": 5}}"#;

#[test]
fn verify_with_unit_weight_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("verify", UNIT, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/verify.json")).unwrap()).unwrap();
    assert_eq!(report["failed"], 0);
    let entries = report["entries"].as_array().unwrap();
    assert!(entries.len() > 30);
    for module in ["grid_quadrature", "gen_powers", "phi_special", "phi_calculus", "spps_solver", "susy", "volterra"] {
        assert!(entries.iter().any(|e| e["module"] == module), "{module} missing");
    }
}

#[test]
fn box_eigenvalues_are_squares() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("eigen", BOX, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("out/eigen.csv")).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next(), Some("index,lambda,residual"));
    let lambdas: Vec<f64> = rows.map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(lambdas.len(), 5);
    for (n, l) in lambdas.iter().enumerate() {
        assert!((l - ((n + 1) * (n + 1)) as f64).abs() < 1e-6, "{l}");
    }
}

#[test]
fn trig_output_has_the_eight_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("trig", SQUARE, dir.path());
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("out/trig.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("node,C_re,C_im,Ct_re,Ct_im,S_re,S_im,St_re,St_im,Ch_re"));
    assert_eq!(text.lines().count(), 258);
    // C C̃ + S S̃ = 1 on every row
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((v[1] * v[3] + v[5] * v[7] - 1.0).abs() < 1e-9);
    }
    assert!(dir.path().join("out/trig_phase.csv").exists());
}

#[test]
fn identical_configs_give_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for sub in ["powers", "trig", "taylor"] {
        assert!(run(sub, SQUARE, a.path()).status.success());
        assert!(run(sub, SQUARE, b.path()).status.success());
    }
    for name in ["powers.csv", "trig.csv", "trig_phase.csv", "taylor_coefficients.csv", "taylor_nodes.csv"] {
        let x = fs::read(a.path().join("out").join(name)).unwrap();
        let y = fs::read(b.path().join("out").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn config_and_precondition_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("powers", "{\"interval\": {\"a\": 0, \"b\": 1},\n \"grid_size\": 33, \"x0\": 0, \"oops\": 1}", dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("oops") && err.contains("line 2"), "{err}");

    let zero = r#"{"interval": {"a": -1, "b": 1}, "grid_size": 33, "x0": 0, "phi": {"kind": "sin"}}"#;
    let out = run("powers", zero, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NonvanishingViolation"));

    let out = run("taylor", UNIT, dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn computational_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let short = BOX.replace("\"count\": 5", "\"count\": 5, \"truncation\": 6").replace("[0.5, 26]", "[0.5, 200]");
    let out = run("eigen", &short, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("TruncationTooSmall"));
}

#[test]
fn environment_tightens_the_identity_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, SQUARE).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_phipower"))
        .args(["taylor", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .env("PHIPOWER_TOL_IDENTITY", "1e-30")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
