use std::path::Path;
use std::process::{Command, Output};

use contest_core::{compute_measures, ContestInstance, Measures, StrategyProfile};
use serde_json::Value;

fn contest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn rates(v: &Value) -> Vec<f64> {
    v["rates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

const SINGLE: &str = r#"{"theta": 1.0, "cost": 1.0, "agents": [{"type": "linear", "v": 1.0}]}"#;
const LOG: &str = r#"{"theta": 0.7, "cost": 1.0, "agents": [
    {"type": "log", "a": 0.9, "b": 0.5}, {"type": "log", "a": 0.4, "b": 0.8}, {"type": "log", "a": 0.6, "b": 0.2}]}"#;
const LINEAR: &str = r#"{"theta": 0.3, "cost": 2.0, "agents": [
    {"type": "linear", "v": 0.4}, {"type": "linear", "v": 2.0}, {"type": "linear", "v": 1.3}, {"type": "linear", "v": 0.0}]}"#;

#[test]
fn solve_single_agent() {
    let dir = tempfile::tempdir().unwrap();
    let out = contest(&["solve", &write(dir.path(), "i.json", SINGLE)]);
    assert!(out.status.success());
    assert_eq!(rates(&stdout_json(&out)), vec![0.25, 0.25]);
}

#[test]
fn closed_method_rejects_log_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = contest(&[
        "solve",
        "--method",
        "closed",
        &write(dir.path(), "i.json", LOG),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn iterative_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "i.json", LINEAR);
    let closed = rates(&stdout_json(&contest(&[
        "solve", "--method", "closed", &file,
    ])));
    let iterative = rates(&stdout_json(&contest(&[
        "solve",
        "--method",
        "iterative",
        &file,
    ])));
    for (a, b) in closed.iter().zip(&iterative) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn reported_measures_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("lin.json", LINEAR),
        ("log.json", LOG),
        ("one.json", SINGLE),
    ] {
        let file = write(dir.path(), name, body);
        let json_out = dir.path().join(format!("{name}.out"));
        let out = contest(&["solve", &file, "--json-out", json_out.to_str().unwrap()]);
        assert!(out.status.success());
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&json_out).unwrap()).unwrap();
        let profile: StrategyProfile = serde_json::from_value(v["profile"].clone()).unwrap();
        let reported: Measures = serde_json::from_value(v["measures"].clone()).unwrap();
        let instance = ContestInstance::from_json_str(body).unwrap();
        assert_eq!(compute_measures(&instance, &profile).unwrap(), reported);
    }
}

#[test]
fn solve_reports_input_indices() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&contest(&["solve", &write(dir.path(), "i.json", LINEAR)]));
    assert_eq!(v["agent_order"], serde_json::json!([1, 2, 0]));
    assert_eq!(v["valuation_scale"], 2.0);
}

#[test]
fn malformed_instance_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "bad.json",
        r#"{"theta": 1.0, "cost": 1.0, "agents": [{"type": "linear", "v": "x"}]}"#,
    );
    let out = contest(&["solve", &file]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("agents[0]"));
}

fn bound_row(args: &[&str]) -> std::collections::HashMap<String, f64> {
    let out = contest(args);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    header.into_iter().map(String::from).zip(row).collect()
}

#[test]
fn bounds_examples() {
    assert_eq!(
        bound_row(&["bounds", "--n", "5", "--theta", "1"])["lb_b1"],
        0.5
    );
    let zero = bound_row(&["bounds", "--n", "5", "--theta", "0"]);
    assert_eq!((zero["ub_b1"], zero["lb_b5"]), (1.0, 0.0));
    assert_eq!(
        bound_row(&["bounds", "--n", "5", "--theta", "0.45"])["ub_b3"],
        0.5
    );
    assert_eq!(
        contest(&["bounds", "--n", "5", "--theta", "-1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bounds_grid() {
    let out = contest(&["bounds", "--n", "3", "--theta-grid", "0:1:0.25"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 6);
    assert_eq!(
        contest(&["bounds", "--n", "3", "--theta-grid", "0:1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "s.json",
        r#"{"n": 4, "theta_start": 0, "theta_stop": 1, "theta_step": 0.5, "instances_per_theta": 30, "seed": 9, "family": "linear"}"#,
    );
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let path = dir.path().join(format!("out{threads}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_contest"))
            .env("CONTEST_THREADS", threads)
            .args(["sweep", &config, "--out", path.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&path).unwrap());
        assert!(path.with_extension("meta.json").exists());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn homogeneous_figure_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = contest(&[
        "figures-data",
        "--figure",
        "9",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("fig9.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 20);
    for row in &rows {
        let m: f64 = row[col("M")].parse().unwrap();
        let mt = 2.0 * m;
        if mt > 19.0 {
            let v0: f64 = row[col("v0")].parse().unwrap();
            let expected = -2.0 * mt / (1.0 + mt) + 20.0 * mt / ((1.0 + mt) * (1.0 + mt));
            assert!((v0 - expected).abs() < 1e-10);
        } else {
            assert_eq!(row[col("v0_closed_form")], "");
        }
    }
}

#[test]
fn figure_two_envelope_respects_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = contest(&[
        "figures-data",
        "--figure",
        "2",
        "--instances",
        "50",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let get = |name: &str| f[col(name)].parse::<f64>().unwrap();
        assert!(get("r1") >= get("lb1") - 1e-9 && get("r1") <= get("ub1") + 1e-9);
    }
    assert!(dir.path().join("fig2.config.json").exists());
}

#[test]
fn invalid_figure_is_usage_error() {
    assert_eq!(
        contest(&["figures-data", "--figure", "14"]).status.code(),
        Some(2)
    );
    assert_eq!(
        contest(&["figures-data", "--figure", "1"]).status.code(),
        Some(2)
    );
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(contest(&["frobnicate"]).status.code(), Some(2));
}
