//! End-to-end checks of the command-line surface: scenario formats, exit
//! codes, and output determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_negentropy")
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

#[test]
fn entropy_quasimodo_reports_minus_one() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_scenario(
        dir.path(),
        "q.json",
        r#"{"tag": "quasimodo", "qubits": 1, "delta": 0.03}"#,
    );
    let out = run(&["entropy", "--scenario", scn.to_str().unwrap(), "--seed", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["vn"].as_f64().unwrap() + 1.0).abs() < 1e-6);
    assert!((v["hmin"].as_f64().unwrap() + 1.0).abs() < 1e-5);
    assert!((v["hmax"].as_f64().unwrap() + 1.0).abs() < 1e-5);
}

#[test]
fn entropy_bob_reports_plus_one() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_scenario(dir.path(), "b.json", r#"{"tag": "bob", "qubits": 1}"#);
    let out = run(&["entropy", "--scenario", scn.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["vn", "hmin", "hmax"] {
        assert!(
            (v[key].as_f64().unwrap() - 1.0).abs() < 1e-5,
            "{key}: {}",
            v[key]
        );
    }
}

#[test]
fn malformed_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_scenario(dir.path(), "bad.json", "{not json");
    let out = run(&["entropy", "--scenario", scn.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_seed_for_randomized_command_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_scenario(dir.path(), "q.json", r#"{"tag": "quasimodo", "qubits": 1}"#);
    let out = run(&["protocol", "--scenario", scn.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn protocol_quasimodo_nets_minus_one_and_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_scenario(
        dir.path(),
        "q.json",
        r#"{"tag": "quasimodo", "qubits": 1, "delta": 0.03, "temperature_kelvin": 300.0}"#,
    );
    let out = run(&["protocol", "--scenario", scn.to_str().unwrap(), "--seed", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let net = v["erasure"]["net_work"].as_f64().unwrap();
    assert!((net + 1.0).abs() < 0.02, "net {net}");
    assert!(v["erasure"]["net_work_joules"].is_f64());
    let extracted = -v["extraction"]["net_work"].as_f64().unwrap();
    assert!((extracted - 2.0).abs() < 0.04);
}

#[test]
fn protocol_output_is_byte_identical_for_same_seed() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_scenario(
        dir.path(),
        "q.json",
        r#"{"tag": "quasimodo", "qubits": 1, "samples": 8}"#,
    );
    let a = run(&["protocol", "--scenario", scn.to_str().unwrap(), "--seed", "5"]);
    let b = run(&["protocol", "--scenario", scn.to_str().unwrap(), "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["protocol", "--scenario", scn.to_str().unwrap(), "--seed", "6"]);
    assert!(c.status.success());
}

#[test]
fn erase_ledger_csv_format() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_scenario(
        dir.path(),
        "b.json",
        r#"{"tag": "bob", "qubits": 1, "schedule": {"e_max": 5.0, "delta": 0.5, "beta": 1.0}}"#,
    );
    let out = run(&[
        "erase",
        "--scenario",
        scn.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("step,label,dE_kTln2,occupancy,cumulative_kTln2"));
    assert_eq!(text.lines().count(), 12); // 10 raise steps + isolated lower + header
}

#[test]
fn decouple_emits_result_and_respects_sample_override() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_scenario(
        dir.path(),
        "q.json",
        r#"{"tag": "quasimodo", "qubits": 1, "delta": 0.2}"#,
    );
    let out = run(&[
        "decouple",
        "--scenario",
        scn.to_str().unwrap(),
        "--seed",
        "3",
        "--samples",
        "4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["samples"].as_u64(), Some(4));
    assert_eq!(v["result"]["m"].as_u64(), Some(1));
    assert!(v["result"]["distance"].as_f64().unwrap() < 1e-9);
}

#[test]
fn aep_csv_for_classical_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_scenario(
        dir.path(),
        "c.json",
        r#"{"tag": "classical", "flip_probability": 0.5, "epsilon": 0.0, "copies": [1, 5, 20]}"#,
    );
    let out = run(&[
        "aep",
        "--scenario",
        scn.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,rate,target"));
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let rate: f64 = cols[1].parse().unwrap();
        assert!((rate - 1.0).abs() < 1e-9, "uniform source rate {rate}");
    }
}

#[test]
fn rate_quasimodo_is_exactly_minus_one() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_scenario(
        dir.path(),
        "q.json",
        r#"{"tag": "quasimodo", "qubits": 1, "copies": [1, 10, 100]}"#,
    );
    let out = run(&["rate", "--scenario", scn.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let w: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((w + 1.0).abs() < 1e-6, "rate row {line}");
    }
}

#[test]
fn capacity_error_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    // non-diagonal custom pure state: copies^dim exceeds the quantum cap
    let third = 1.0 / 3.0;
    let row = format!("[{third}, {third}, 0.0, {third}]");
    let zero = "[0.0, 0.0, 0.0, 0.0]";
    let body = format!(
        r#"{{"tag": "custom", "qubits": 1, "copies": [4],
            "layout": [["S", 1], ["O", 1], ["Gamma", 0]],
            "state": {{"dims": [2, 2],
                       "re": [{row}, {row}, {zero}, {row}],
                       "im": [{zero}, {zero}, {zero}, {zero}]}}}}"#
    );
    let scn = write_scenario(dir.path(), "big.json", &body);
    let out = run(&["aep", "--scenario", scn.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_scenario(dir.path(), "b.json", r#"{"tag": "bob", "qubits": 1}"#);
    let target = dir.path().join("report.json");
    let out = run(&[
        "entropy",
        "--scenario",
        scn.to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert!((v["vn"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}
