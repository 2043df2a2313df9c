use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robustnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn analyze_golden() {
    let out = run(&["analyze", &fixture("three_node.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["stable"], true);
    assert_eq!(v["u"], serde_json::json!(["1", "2", "4"]));
    assert_eq!(v["gamma"], "4");
    assert_eq!(v["argmax"], serde_json::json!([3]));
}

#[test]
fn analyze_unstable_still_reports() {
    let out = run(&["analyze", &fixture("unstable_pair.json")]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["stable"], false);
    assert_eq!(v["spectral_radius"], "1");
}

#[test]
fn malformed_input_is_error() {
    let out = run(&["analyze", &fixture("malformed.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "format");
    assert!(err["error"].is_string());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let out = run(&["--eps-stab", "1", "analyze", &fixture("three_node.json")]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "usage");
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn check_exit_codes() {
    let out = run(&["check", &fixture("three_node.json"), &fixture("add_node.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["u_after"], serde_json::json!(["1", "2", "4", "4"]));

    let out = run(&["check", &fixture("four_node.json"), &fixture("add_edge_4_2.json")]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["gamma_after"], "4.8");
    assert_eq!(v["repair"]["a_new"], "0.3");

    let out = run(&["check", &fixture("weak_pair.json"), &fixture("close_loop.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["stable_after"], false);
}

#[test]
fn check_with_level_and_certificate() {
    let out = run(&[
        "check",
        &fixture("four_node.json"),
        &fixture("add_edge_4_2.json"),
        "--gamma",
        "5",
        "--local-cert",
        &fixture("cert_four_node.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["gamma_scalable"], true);
    assert_eq!(v["local_check"], false);
}

#[test]
fn repair_golden() {
    let out = run(&[
        "repair",
        &fixture("four_node.json"),
        &fixture("add_edge_4_2.json"),
        "--local-cert",
        &fixture("cert_four_node.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["node"], 4);
    assert_eq!(v["a_new"], "0.3");
    assert_eq!(v["verified"], true);
}

#[test]
fn walks_golden() {
    let out = run(&["walks", &fixture("three_node.json"), "--target", "3", "--max-len", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["sum"], "3");
    assert_eq!(v["tail_bound"], "0");
}

#[test]
fn cycles_report() {
    let out = run(&["cycles", &fixture("three_node.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["cycles"], serde_json::json!([]));
}

#[test]
fn sequence_golden_script() {
    let out = run(&["sequence", &fixture("three_node.json"), &fixture("script.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let steps = v["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 3);
    assert_eq!(steps[0]["scalable"], true);
    assert_eq!(steps[1]["scalable"], false);
    assert_eq!(steps[1]["gamma_after"], "4.8");
    assert_eq!(steps[2]["gamma_after"], "4");
    assert_eq!(v["final"]["gamma"], "4");
    assert_eq!(v["gamma_robust"], true);
}

#[test]
fn apply_writes_network() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = run(&[
        "apply",
        &fixture("three_node.json"),
        &fixture("add_node.json"),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let net = robustnet::format::read_network(&path).unwrap();
    assert_eq!(net, robustnet::golden::four_node());
}

#[test]
fn simulate_outputs() {
    let out = run(&[
        "simulate",
        &fixture("three_node.json"),
        "--horizon",
        "0.01",
        "--step",
        "0.001",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,x1,x2,x3,d1,d2,d3\n"));
    assert_eq!(text.lines().count(), 12);

    let out = run(&["simulate", &fixture("three_node.json"), "--trials", "10", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["trials"].as_array().unwrap().len(), 10);
}

#[test]
fn output_is_deterministic() {
    let args = ["simulate", &fixture("three_node.json"), "--trials", "6", "--seed", "11"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["sequence", &fixture("three_node.json"), &fixture("script.json")];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn human_format() {
    let out = run(&["--format", "human", "analyze", &fixture("three_node.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("γ = 4"), "{text}");
}
