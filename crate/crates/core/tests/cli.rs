//! End-to-end runs of the binary.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semicausal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).expect("valid json")
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest", "--n", "3", "--cases", "30", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out.stdout)["ok"], true);
}

#[test]
fn missing_input_names_path() {
    let out = run(&["analyze", "/nonexistent/series.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err = json(&out.stderr);
    assert_eq!(err["error"], "io");
    assert_eq!(err["path"], "/nonexistent/series.csv");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["selftest", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "x.csv", "--perm", "reverse"]).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "x,y\n0,1\n1\n").unwrap();
    let out = run(&["analyze", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out.stderr)["error"], "row");
    let out = run(&["mixture", "--family", "markov:k=9,g=9"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out.stderr)["error"], "family_too_large");
}

#[test]
fn analyze_lag1_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("lag1.csv");
    let report = dir.path().join("report.json");
    let csv_s = csv.to_str().unwrap();
    let out = run(&["simulate", "--model", "lag1-copy", "--coupling", "0.9", "--n", "3000", "--seed", "2", "--out", csv_s]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["analyze", csv_s, "--trials", "50", "--seed", "2", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&std::fs::read(&report).unwrap());
    assert_eq!(doc["config"]["seed"], 2);
    assert_eq!(doc["config"]["family"], "markov:k=1,g=4");
    let plugin = doc["decompositions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|d| d["label"] == "plug_in")
        .unwrap();
    assert!(plugin["T_yx"].as_f64().unwrap() > 0.3);
    assert!(plugin["T_xy"].as_f64().unwrap().abs() < 0.01);
    let associated = &doc["decompositions"][0];
    assert_eq!(associated["label"], "associated");
    let r = associated["I"].as_f64().unwrap()
        - associated["T_xy"].as_f64().unwrap()
        - associated["T_yx"].as_f64().unwrap()
        - associated["T_inst"].as_f64().unwrap();
    assert!(r.abs() < 1e-6);
    let sit = &doc["reports"][0];
    assert_eq!(sit["statistic"], "sit_y_from_x");
    assert!(sit["p_value"].as_f64().unwrap() < 0.05);
    let flags = doc["reports"][6]["flags"].as_array().unwrap();
    assert!(flags.iter().any(|f| f.as_str().unwrap().starts_with("substitution")));
}

#[test]
fn test_command_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pair.csv");
    let csv_s = csv.to_str().unwrap();
    run(&["simulate", "--n", "400", "--out", csv_s]);
    let out = run(&["test", csv_s, "--name", "8", "--trials", "10", "--exact-sidecar"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out.stdout);
    let keys: Vec<_> = doc["report"].as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys, ["family", "flags", "p_value", "seed", "statistic", "terms", "trials", "value_log2"]);
    assert!(doc["exact"]["ratio"].as_str().unwrap().contains('/'));
    assert_eq!(doc["config"]["arithmetic"], "rational");
    for name in ["sit_y_from_x", "granger", "hidden_influence"] {
        let out = run(&["test", csv_s, "--name", name, "--trials", "5"]);
        assert_eq!(out.status.code(), Some(0), "{name}");
    }
}

#[test]
fn grow_uniform_trace() {
    let out = run(&["grow", "--uniform", "--n", "1"]);
    let doc = json(&out.stdout);
    assert_eq!(doc["trace"]["branch"], "00");
    assert_eq!(doc["trace"]["load_nodes"][0], "01");
    assert_eq!(doc["trace"]["output_total"], "5/8");
    assert_eq!(doc["amplification"]["steps"][0]["q_ratio"], "3/5");
}
