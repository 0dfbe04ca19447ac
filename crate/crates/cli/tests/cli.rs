//! The `patrolscope` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const THREE_NODE: &str = r#"{
  "name": "three-node example",
  "locations": [{"id": "A"}, {"id": "B"}, {"id": "C"}],
  "nodes": [
    {"id": "0", "location": "A"},
    {"id": "1", "location": "B"},
    {"id": "2", "location": "C"}
  ],
  "edges": [
    {"from": "0", "to": "1", "p": 1.0},
    {"from": "1", "to": "1", "p": 0.6666666666666666},
    {"from": "1", "to": "2", "p": 0.3333333333333333},
    {"from": "2", "to": "0", "p": 0.5},
    {"from": "2", "to": "1", "p": 0.5}
  ]
}"#;

const ROW_SUM_099: &str = r#"{
  "name": "short row",
  "locations": [{"id": "A"}],
  "nodes": [{"id": "n0", "location": "A"}, {"id": "n1", "location": "A"}],
  "edges": [
    {"from": "n0", "to": "n1", "p": 0.99},
    {"from": "n1", "to": "n0", "p": 1.0}
  ]
}"#;

const TWO_DISJOINT_CYCLES: &str = r#"{
  "name": "two cycles",
  "locations": [{"id": "A"}, {"id": "B"}],
  "nodes": [
    {"id": "a0", "location": "A"}, {"id": "a1", "location": "A"},
    {"id": "b0", "location": "B"}, {"id": "b1", "location": "B"}
  ],
  "edges": [
    {"from": "a0", "to": "a1", "p": 1.0}, {"from": "a1", "to": "a0", "p": 1.0},
    {"from": "b0", "to": "b1", "p": 1.0}, {"from": "b1", "to": "b0", "p": 1.0}
  ]
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_patrolscope"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr_lines(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stderr.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("stderr is JSON lines"))
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", THREE_NODE);
    let out = run(&["validate", path_str(&good)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());

    let short = write(dir.path(), "short.json", ROW_SUM_099);
    let out = run(&["validate", path_str(&short)]);
    assert_eq!(out.status.code(), Some(2));
    let d = &stderr_lines(&out)[0];
    assert_eq!(d["code"], "RowNotStochastic");
    assert_eq!(d["node"], "n0");
    assert_eq!(d["sum"], 0.99);

    let broken = write(dir.path(), "broken.json", "{\"name\": ");
    let out = run(&["validate", path_str(&broken)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_lines(&out)[0]["code"], "MalformedDocument");

    let reducible = write(dir.path(), "reducible.json", TWO_DISJOINT_CYCLES);
    let out = run(&["validate", path_str(&reducible)]);
    assert_eq!(out.status.code(), Some(0));
    let d = &stderr_lines(&out)[0];
    assert_eq!(d["level"], "warning");
    assert_eq!(d["code"], "Reducible");
    assert_eq!(d["closed_classes"], 2);

    let out = run(&["validate", path_str(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_lines(&out)[0]["code"], "Io");
}

#[test]
fn analyze_is_byte_stable_and_carries_the_stationary_vector() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", THREE_NODE);
    let a = run(&["analyze", path_str(&good), "--seed", "5"]);
    let b = run(&["analyze", path_str(&good), "--seed", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    let pi: Vec<f64> = report["stationary"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["mass"].as_f64().unwrap())
        .collect();
    assert_eq!(pi, vec![0.111111111, 0.666666667, 0.222222222]);
    assert_eq!(report["seed"], 5);

    let file = dir.path().join("report.json");
    let c = run(&["analyze", path_str(&good), "--seed", "5", "--report", path_str(&file)]);
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(&file).unwrap(), a.stdout);
}

#[test]
fn analyze_fails_with_code_three_without_unique_stationary_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let reducible = write(dir.path(), "reducible.json", TWO_DISJOINT_CYCLES);
    let out = run(&["analyze", path_str(&reducible)]);
    assert_eq!(out.status.code(), Some(3));
    let lines = stderr_lines(&out);
    assert!(lines.iter().any(|d| d["code"] == "NotIrreducible"));
}

#[test]
fn corridor_report_contains_end_to_end_hitting_time() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(&["generate", "corridor", "--n", "4"]);
    let file = write(dir.path(), "corridor.json", std::str::from_utf8(&gen.stdout).unwrap());
    let out = run(&["analyze", path_str(&file)]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let order: Vec<&str> = report["hitting_times"]["order"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    let a = order.iter().position(|&x| x == "e0").unwrap();
    let b = order.iter().position(|&x| x == "e5").unwrap();
    assert_eq!(report["hitting_times"]["steps"][a][b], 25.0);
}

#[test]
fn simulate_is_deterministic_per_seed_and_echoes_drawn_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", THREE_NODE);
    let args = ["simulate", path_str(&good), "--start", "0", "--seed", "9", "--count", "50"];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, run(&args).stdout);
    let trace: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(trace["occupancy"].as_array().unwrap().len(), 101);
    assert_eq!(trace["occupancy"][0], serde_json::json!([50, 0, 0]));

    let drawn = run(&["simulate", path_str(&good), "--start", "0", "--count", "5"]);
    let trace: Value = serde_json::from_slice(&drawn.stdout).unwrap();
    let seed = trace["seed"].as_u64().unwrap().to_string();
    let replay = run(&["simulate", path_str(&good), "--start", "0", "--count", "5", "--seed", &seed]);
    assert_eq!(drawn.stdout, replay.stdout);

    let bad = run(&["simulate", path_str(&good), "--start", "nope"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn layout_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", THREE_NODE);
    let a = run(&["layout", path_str(&good), "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, run(&["layout", path_str(&good), "--seed", "3"]).stdout);
    assert_ne!(a.stdout, run(&["layout", path_str(&good), "--seed", "4"]).stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["positions"]["locations"].as_array().unwrap().len(), 3);
}

#[test]
fn export_dot_clusters_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(&["generate", "corridor", "--n", "2", "--memory"]);
    let file = write(dir.path(), "c.json", std::str::from_utf8(&gen.stdout).unwrap());
    let dot = String::from_utf8(run(&["export-dot", path_str(&file)]).stdout).unwrap();
    assert_eq!(dot.matches("subgraph \"cluster_").count(), 4);

    let single = write(
        dir.path(),
        "single.json",
        r#"{"name": "one", "locations": [{"id": "L"}], "nodes": [{"id": "a", "location": "L"}],
            "edges": [{"from": "a", "to": "a", "p": 1}]}"#,
    );
    let dot = String::from_utf8(run(&["export-dot", path_str(&single)]).stdout).unwrap();
    assert_eq!(dot.matches("->").count(), 1);
    assert!(dot.contains("[label=\"1.0\"]"));
}

#[test]
fn sweep_lists_first_break_of_hidden_ring() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(&["generate", "hidden-ring"]);
    let file = write(dir.path(), "ring.json", std::str::from_utf8(&gen.stdout).unwrap());
    let out: Value = serde_json::from_slice(&run(&["sweep", path_str(&file)]).stdout).unwrap();
    assert_eq!(out["breaks"][0]["threshold"], 0.001);
}

#[test]
fn import_builds_a_strategy_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write(dir.path(), "m.csv", ",x,y\nx,0,1\ny,0.5,0.5\n");
    let map = write(dir.path(), "l.csv", "node_id,location_id\nx,Hall\ny,Hall\n");
    let out = run(&["import", "--matrix", path_str(&matrix), "--locations", path_str(&map), "--name", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let file = write(dir.path(), "s.json", std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(run(&["validate", path_str(&file)]).status.code(), Some(0));
}
