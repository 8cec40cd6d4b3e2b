use std::process::{Command, Output};

use serde_json::Value;

fn doobkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_doobkit")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

#[test]
fn models_list_names_every_family() {
    let out = doobkit(&["models", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["jacobi", "laguerre", "deltoid", "matrix_jacobi", "weyl_dyson"] {
        assert!(text.contains(name), "{name} missing from {text}");
    }
}

#[test]
fn verify_jacobi_passes() {
    let out = doobkit(&["verify", "--model", "jacobi", "--alpha", "3/2", "--beta", "1/2"]);
    assert!(out.status.success());
    let cert = stdout_json(&out);
    assert_eq!(cert["pass"], Value::Bool(true));
    let names: Vec<&str> = cert["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for n in ["boundary_equation", "density", "ground_state", "kappa", "dual", "involution"] {
        assert!(names.contains(&n), "{n} not in {names:?}");
    }
}

#[test]
fn verify_all_passes() {
    let out = doobkit(&["verify", "--model", "all"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["pass"], Value::Bool(true));
}

#[test]
fn perturbed_model_file_fails_with_location() {
    let out = doobkit(&["models", "show", "jacobi"]);
    let mut doc = stdout_json(&out)["model"].clone();
    doc["gamma"][0][0] = Value::String("-x^2 + 2".into());
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("perturbed_jacobi.json");
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();

    let out = doobkit(&["verify", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let cert = stdout_json(&out);
    assert_eq!(cert["pass"], Value::Bool(false));
    let failed: Vec<&Value> = cert["checks"].as_array().unwrap().iter().filter(|c| c["pass"] == false).collect();
    let boundary = failed.iter().find(|c| c["name"] == "boundary_equation").expect("boundary check fails");
    let detail = boundary["detail"].as_str().unwrap();
    assert!(detail.contains("polynomial 0") && detail.contains("coordinate 0"), "{detail}");
}

#[test]
fn unknown_model_is_an_error() {
    let out = doobkit(&["verify", "--model", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown model"));
}

#[test]
fn htransform_reports_kappa() {
    let out = doobkit(&["htransform", "--model", "laguerre", "--alpha", "2"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["kappa"], "1");
    assert_eq!(v["model"]["boundary"][0]["exponent"], "-1");
}

#[test]
fn simulate_writes_csv_with_header() {
    let out = doobkit(&[
        "simulate", "--model", "jacobi", "--conditioned", "--n-paths", "20", "--t", "0.05", "--seed", "3",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# label="));
    assert_eq!(lines.len(), 22);
    for l in &lines[2..] {
        let x: f64 = l.parse().unwrap();
        assert!(x.abs() < 1.0);
    }
}

#[test]
fn simulate_is_reproducible_across_execution_modes() {
    let args = ["simulate", "--matrix", "su3", "--n-paths", "8", "--t", "0.02", "--format", "json"];
    let par = stdout_json(&doobkit(&args));
    let mut seq_args = args.to_vec();
    seq_args.push("--sequential");
    let seq = stdout_json(&doobkit(&seq_args));
    assert_eq!(par["points"], seq["points"]);
    assert_eq!(par["moments"].as_array().unwrap().len(), 2);
}

#[test]
fn chain_condition_emits_report() {
    let out = doobkit(&[
        "chain",
        "condition",
        "--matrix",
        "[[0.5,0.3,0.2],[0.2,0.5,0.3],[0.3,0.3,0.4]]",
        "--subset",
        "0,1",
        "--x0",
        "0",
        "--n",
        "2",
        "--N",
        "8",
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let tv = v["tv_to_q_chain"].as_f64().unwrap();
    assert!((0.0..1e-2).contains(&tv), "{tv}");
    for row in v["q"].as_array().unwrap() {
        let s: f64 = row.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}

#[test]
fn small_compare_runs_and_config_overrides_apply() {
    let out = doobkit(&["config"]);
    let mut cfg = stdout_json(&out);
    cfg["experiments"]["ou-laguerre"]["n_paths"] = Value::from(300);
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("small_config.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();

    let out = doobkit(&["--config", path.to_str().unwrap(), "compare", "ou-laguerre", "--dt", "0.01", "--threshold", "1"]);
    let v = stdout_json(&out);
    assert_eq!(v["config"]["n_paths"], 300);
    assert_eq!(v["config"]["dt"], 0.01);
    assert_eq!(out.status.success(), v["pass"] == true);
    assert_eq!(v["pass"], true);
}
