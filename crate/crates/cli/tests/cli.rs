use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spectral-edge"));
    c.env("RUST_LOG", "error");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn binary")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}):\n{}\nstderr:\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

#[test]
fn validate_presets_pass() {
    for preset in ["anderson", "dipole", "quartic"] {
        let out = run(&["validate", preset]);
        assert_eq!(out.status.code(), Some(0), "{preset}");
        let v = stdout_json(&out);
        assert!(v["checks"]
            .as_array()
            .unwrap()
            .iter()
            .all(|c| c["passed"] == true));
    }
}

#[test]
fn model_file_with_inconsistent_regime_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    // A model file with a regime that contradicts its support must be rejected.
    let text = r#"{
      "dimension": 1, "period": 1,
      "hoppings": [
        {"k": [0], "k_prime": [0], "m": [1], "re": -1.0, "im": 0.0},
        {"k": [0], "k_prime": [0], "m": [-1], "re": -1.0, "im": 0.0},
        {"k": [0], "k_prime": [0], "m": [0], "re": 2.0, "im": 0.0}
      ],
      "potential": [[1.0, 0.0]],
      "disorder": {"s_minus": -1.0, "s_plus": 1.0, "regime": "Positive"}
    }"#;
    fs::write(&path, text).unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn unknown_preset_is_an_error() {
    let out = run(&["coefficients", "no-such-model"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));
}

#[test]
fn dipole_coefficients() {
    let out = run(&["coefficients", "dipole", "--eps", "0.01"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["case"], "Quadratic");
    assert_eq!(v["p"], 1);
    assert!(v["A1"].as_f64().unwrap().abs() < 1e-12);
    assert!((v["A2"].as_f64().unwrap() + 0.25).abs() < 1e-10);
    let bound = v["bound"][0]["value"].as_f64().unwrap();
    assert!((bound + 0.25e-4).abs() < 1e-14);
}

#[test]
fn quartic_coefficients() {
    let out = run(&["coefficients", "quartic"]);
    let v = stdout_json(&out);
    assert!(v["theta"][0].as_f64().unwrap().abs() < 1e-9);
    assert!((v["A2"].as_f64().unwrap() + 1.0 / 18.0).abs() < 1e-10);
}

#[test]
fn anderson_positive_support_is_linear() {
    let out = run(&[
        "coefficients",
        "anderson",
        "--support",
        "0,1",
        "--eps",
        "0.1",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["case"], "Linear");
    assert!(v["A1_prime"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["A1"].is_null());
}

#[test]
fn floquet_scan_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let out = run(&[
        "floquet-scan",
        "anderson",
        "--grid",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta_0,lambda_min,p,gap"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').take(2).map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 8);
    for r in rows {
        assert!((r[1] - (2.0 - 2.0 * r[0].cos())).abs() < 1e-12);
    }
}

#[test]
fn fiber_at_theta() {
    let out = run(&["fiber", "dipole", "--theta", "0"]);
    let v = stdout_json(&out);
    let ev: Vec<f64> = v["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!(ev[0].abs() < 1e-12 && (ev[1] - 4.0).abs() < 1e-12);

    let out = run(&["fiber", "dipole", "--theta", "0,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fiber_sweep_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let summary = dir.path().join("summary.json");
    let out = run(&[
        "verify",
        "fiber-sweep",
        "dipole",
        "--eps",
        "0.01,0.02,0.04,0.08",
        "--csv",
        csv.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("epsilon,value,q_star,predicted"));
    assert_eq!(text.lines().count(), 5);
    let s: Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["passed"], true);
    assert_eq!(s["checks"]["upper_bound"], true);
}

#[test]
fn montecarlo_is_reproducible_and_worker_independent() {
    let args = [
        "verify",
        "montecarlo",
        "dipole",
        "--eps",
        "0.1",
        "--L",
        "8",
        "--samples",
        "6",
        "--seed",
        "42",
    ];
    let a = bin()
        .args(args)
        .env("SPECTRAL_EDGE_WORKERS", "1")
        .output()
        .unwrap();
    let b = bin()
        .args(args)
        .env("SPECTRAL_EDGE_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 7);

    let c = run(&[
        "verify",
        "montecarlo",
        "dipole",
        "--eps",
        "0.1",
        "--L",
        "8",
        "--samples",
        "6",
        "--seed",
        "43",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn montecarlo_requires_seed() {
    let out = run(&["verify", "montecarlo", "dipole", "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn quartic_trial_reports_failure_with_exit_one() {
    let out = run(&["verify", "quartic", "--eps", "0.01,0.02", "--xi", "0.3"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("epsilon,xi,n,value,bound,satisfied"));

    let out = run(&["verify", "quartic", "--eps", "0.01", "--xi", "0.2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kirsch_simon_alloy() {
    let out = run(&[
        "verify",
        "kirsch-simon",
        "alloy",
        "--period",
        "2",
        "--w",
        "0,1",
        "--points",
        "32",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let s: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(s["checks"]["lower_violations"], 0);

    let out = run(&["verify", "kirsch-simon", "quartic"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    let report = dir.path().join("report.json");
    fs::write(
        &config,
        format!(
            r#"{{"model": {{"preset": {{"name": "dipole"}}}},
                "epsilon_list": [0.04, 0.01, 0.02],
                "verify": {{"suites": ["fiber-sweep"]}},
                "output": {{"path": "{}"}}}}"#,
            report.display()
        ),
    )
    .unwrap();
    let out = run(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    let eps: Vec<f64> = v["config"]["epsilon_list"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(eps, [0.01, 0.02, 0.04]);
}

#[test]
fn run_csv_format() {
    let out = run(&[
        "run",
        "--model",
        "dipole",
        "--eps",
        "0.01,0.02",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().next().unwrap().contains("epsilon"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn run_needs_a_model() {
    let out = run(&["run"]);
    assert_eq!(out.status.code(), Some(2));
}
