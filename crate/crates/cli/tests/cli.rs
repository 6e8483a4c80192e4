//! End-to-end runs of the `ceqaoa` binary.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use ceqaoa_core::mixer::Envelope;
use ceqaoa_core::workflow::{CertifyReport, FeasibilityReport, RlReport, SimulateReport, Status};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ceqaoa"))
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn data(name: &str) -> String {
    root().join("data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8")
}

/// Top-level keys the schema requires must be exactly the emitted keys.
fn check_schema_keys(schema: &str, doc: &Value) {
    let text = std::fs::read_to_string(root().join("schemas").join(schema)).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let required: BTreeSet<&str> = schema["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    let emitted: BTreeSet<&str> = doc.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(required, emitted, "{schema}");
}

#[test]
fn certify_toy_round_trip() {
    let out = run(&["certify", "--instance", &data("two_string.json"), "--gamma", "180", "--degrees", "-p", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let report: CertifyReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.status, Status::Certified);
    assert!((report.q0_exact.unwrap() - 1.0).abs() < 1e-12);
    assert!((report.certificate.as_ref().unwrap().q0_bound - 0.8).abs() < 1e-12);
    check_schema_keys("certificate.schema.json", &serde_json::from_str(&text).unwrap());
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);
}

#[test]
fn collision_exits_uncertifiable() {
    let out = run(&["certify", "--instance", &data("two_string.json"), "--gamma", "6.283185307179586", "-p", "2"]);
    assert_eq!(out.status.code(), Some(3));
    let report: CertifyReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.status, Status::Uncertifiable);
    assert!(report.certificate.is_none());
}

#[test]
fn cap_and_precondition_codes() {
    let out = run(&["certify", "--instance", &data("assignment3.json"), "--gamma", "0.3", "-p", "1", "--cap", "8"]);
    assert_eq!(out.status.code(), Some(4));
    let out = run(&["plan", "-p", "2", "--c-beta", "1.5", "--delta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["certify", "--instance", "/nonexistent.json", "--gamma", "0.3", "-p", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn feasibility_report_shape() {
    let out = run(&["feasibility", "--instance", &data("assignment3.json"), "--budget", "40", "--seed", "4"]);
    assert!(out.status.success());
    let value: Value = serde_json::from_slice(&out.stdout).unwrap();
    check_schema_keys("feasibility.schema.json", &value);
    let report: FeasibilityReport = serde_json::from_value(value).unwrap();
    assert!(report.connected);
    assert_eq!(report.levels.values().sum::<usize>(), 27);
    assert!(report.search.pi_f >= report.search.baseline);
}

#[test]
fn rl_writes_law_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let law = dir.path().join("law.csv");
    let json = dir.path().join("rl.json");
    let out = run(&[
        "rl",
        "--instance",
        &data("ladder.json"),
        "--gamma",
        "0.4",
        "-p",
        "3",
        "--half-width",
        "0.5",
        "--samples",
        "200",
        "--seed",
        "9",
        "--law",
        law.to_str().unwrap(),
        "-o",
        json.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&json).unwrap();
    check_schema_keys("rl.schema.json", &serde_json::from_str(&text).unwrap());
    let report: RlReport = serde_json::from_str(&text).unwrap();
    assert!(report.success_mass >= report.bound - 3.0 * report.success_std_error);
    let csv = std::fs::read_to_string(&law).unwrap();
    assert!(csv.starts_with("string,energy,probability,std_error\n"));
    let total: f64 = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn envelope_csv_round_trip() {
    let out = run(&["envelope", "-n", "3", "-m", "2", "--betas", "0.4,-1.2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let env = Envelope::from_csv(&text, 3, 2).unwrap();
    assert_eq!(env.to_csv(3, 2).unwrap(), text);

    let dir = tempfile::tempdir().unwrap();
    let init = dir.path().join("v0.json");
    std::fs::write(&init, "[0.5, 0.25, 0.125, 0.125]").unwrap();
    let out = run(&[
        "envelope",
        "-n",
        "2",
        "-m",
        "2",
        "--betas",
        "0.9",
        "--initial",
        init.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let env = Envelope::from_json(&stdout(&out)).unwrap();
    assert!((env.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert_ne!(env.probs()[0], 0.5);
}

#[test]
fn simulate_counts_match_shots() {
    let out = run(&[
        "simulate",
        "--instance",
        &data("assignment3.json"),
        "--gammas",
        "0.3",
        "--betas",
        "0.8",
        "--shots",
        "250",
        "--seed",
        "1",
    ]);
    assert!(out.status.success());
    let report: SimulateReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.counts.unwrap().values().sum::<u64>(), 250);
    assert!(report.success_probability <= report.feasibility_probability + 1e-15);
}

#[test]
fn curves_sorted_with_checkpoint() {
    let out = run(&["curves", "--deltas", "3.141592653589793,0.5,1.0", "--ps", "2,1", "--epsilon", "0.1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("delta,p,epsilon,c_min"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.windows(2).all(|w| (w[0][1], w[0][0]) < (w[1][1], w[1][0])));
    let pi_row = rows.iter().find(|r| r[1] == 2.0 && r[0] == std::f64::consts::PI).unwrap();
    assert!((pi_row[3] - 0.5).abs() < 1e-12);
}

#[test]
fn plan_order_reduction() {
    let out = run(&[
        "plan",
        "-p",
        "4",
        "--c-beta",
        "0.5",
        "--delta",
        "90",
        "--degrees",
        "--reduce-to",
        "2",
        "--c-prime",
        "1",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["certificate"]["depth_for_target"], 4);
    let x = v["certificate"]["x"].as_f64().unwrap();
    let xr = v["order_reduction"]["x_reduced"].as_f64().unwrap();
    assert!((xr - x * 9.0 / 25.0).abs() < 1e-12);
}
