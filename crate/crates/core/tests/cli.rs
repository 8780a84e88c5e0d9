use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mimo-qaoa"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn complexity_two_qubits_level_one() {
    let v = stdout_json(&run(&["complexity", "--n", "2", "--level", "1"]));
    assert_eq!(v["total_gates"], 7);
    assert_eq!(v["state_bytes"], 32);
}

#[test]
fn spectrum_single_qubit_gap() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("spec.csv");
    let f = fixture("single_qubit.json");
    let out = run(&["spectrum", f.to_str().unwrap(), "--grid", "201", "-o", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let line = String::from_utf8(out.stdout).unwrap();
    let gap: f64 = line
        .split_whitespace()
        .find_map(|t| t.strip_prefix("min_gap="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((gap - 1.94).abs() <= 0.01, "gap {gap}");
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("tau,lambda_0,lambda_1\n"));
    assert_eq!(text.lines().count(), 202);
}

#[test]
fn detect_cml_identity_channel() {
    let f = fixture("identity_two.json");
    let v = stdout_json(&run(&["detect", f.to_str().unwrap(), "--detector", "cml"]));
    assert_eq!(v["symbols"], serde_json::json!([1, -1]));
}

#[test]
fn detect_all_detectors_on_two_qubit_fixture() {
    let f = fixture("two_qubit.json");
    let cml = stdout_json(&run(&["detect", f.to_str().unwrap(), "--detector", "cml"]));
    let mmse = stdout_json(&run(&["detect", f.to_str().unwrap(), "--detector", "mmse"]));
    let qml = stdout_json(&run(&["detect", f.to_str().unwrap(), "--detector", "qml", "--seed", "3"]));
    assert_eq!(cml["symbols"].as_array().unwrap().len(), 2);
    assert_eq!(mmse["symbols"].as_array().unwrap().len(), 2);
    assert_eq!(qml["symbols"], cml["symbols"]);
}

#[test]
fn encode_dumps_both_forms() {
    let f = fixture("single_qubit.json");
    let v = stdout_json(&run(&["encode", f.to_str().unwrap()]));
    let full_field = v["full"]["fields"][0].as_f64().unwrap();
    let simple_field = v["simplified"]["fields"][0].as_f64().unwrap();
    assert!((simple_field - 1.95415).abs() < 1e-4);
    assert!((full_field - 2.0 * simple_field).abs() < 1e-12);
}

#[test]
fn trotter_reports_overlap() {
    let f = fixture("single_qubit.json");
    let v = stdout_json(&run(&[
        "trotter", f.to_str().unwrap(), "--time", "50", "--slices", "500", "--substeps", "2",
    ]));
    assert!(v["ground_overlap"].as_f64().unwrap() >= 0.95);
}

#[test]
fn landscape_and_optimize() {
    let f = fixture("single_qubit.json");
    let out = run(&["landscape", f.to_str().unwrap(), "--grid", "11"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("gamma,beta,F1\n"));
    assert_eq!(text.lines().count(), 1 + 121);

    let v = stdout_json(&run(&["optimize", f.to_str().unwrap(), "--level", "1", "--starts", "9", "--seed", "1"]));
    let best = v["result"]["best_value"].as_f64().unwrap();
    assert!((best + 1.95415).abs() < 1e-4, "best {best}");
}

#[test]
fn ber_writes_csv_and_metadata_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = run(&[
            "ber", "--n", "2", "--snr", "0:4:2", "--trials", "50", "--seed", "9", "--detectors", "cml,mmse,qml",
            "-o", p.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let ca = fs::read(&a).unwrap();
    assert_eq!(ca, fs::read(&b).unwrap());
    let text = String::from_utf8(ca).unwrap();
    assert!(text.starts_with("snr_db,trials,ber_cml,ber_mmse,ber_qml\n"));
    assert_eq!(text.lines().count(), 4);
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["master_seed"], 9);
}

#[test]
fn help_on_every_subcommand() {
    let subs = [
        ("encode", vec!["--output"]),
        ("spectrum", vec!["--grid", "--xi", "--output"]),
        ("trotter", vec!["--time", "--slices", "--substeps"]),
        ("landscape", vec!["--grid", "--gamma-max", "--beta-max"]),
        ("optimize", vec!["--level", "--starts", "--seed", "--max-evals", "--trace"]),
        ("detect", vec!["--detector", "--level", "--starts", "--seed", "--shots"]),
        ("ber", vec!["--n", "--snr", "--trials", "--seed", "--detectors", "--shots", "--metadata"]),
        ("complexity", vec!["--n", "--level"]),
    ];
    for (sub, flags) in subs {
        let out = run(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        let text = String::from_utf8(out.stdout).unwrap();
        for flag in flags {
            assert!(text.contains(flag), "{sub} --help lacks {flag}");
        }
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["complexity", "--n", "2", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["ber", "--n", "2", "--snr", "0:x:1"]).status.code(), Some(2));
    let f = fixture("identity_two.json");
    let out = run(&["detect", f.to_str().unwrap(), "--detector", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_instance_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"channel": [[1.0]], "noise_variance": 1.0}"#, "received"),
        (r#"{"channel": [[1.0]], "received": [1.0, 2.0], "noise_variance": 1.0}"#, "received"),
        (r#"{"channel": [[1.0, 2.0], [3.0]], "received": [1.0, 2.0], "noise_variance": 1.0}"#, "channel"),
        (r#"{"channel": [[1.0]], "received": [1.0], "noise_variance": -1.0}"#, "noise_variance"),
        (r#"{"channel": [[1.0]], "received": [1.0], "noise_variance": 1.0, "true_symbols": [2]}"#, "true_symbols"),
    ];
    for (i, (body, field)) in cases.iter().enumerate() {
        let p = dir.path().join(format!("bad{i}.json"));
        fs::write(&p, body).unwrap();
        let out = run(&["encode", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "case {i}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(field), "case {i}: {err}");
    }
}

#[test]
fn runtime_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("big.json");
    let n = 13;
    let channel: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let body = serde_json::json!({"channel": channel, "received": vec![1.0; n], "noise_variance": 1.0});
    fs::write(&p, body.to_string()).unwrap();
    let out = run(&["spectrum", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("12"));
}

#[test]
fn in_process_entry_point_matches() {
    assert_eq!(mimo_qaoa::cli::main_with_args(["mimo-qaoa", "complexity", "--n", "0"]), 2);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let code = mimo_qaoa::cli::main_with_args(["mimo-qaoa", "complexity", "--n", "3", "--level", "2", "-o", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["total_gates"], 24);
}
