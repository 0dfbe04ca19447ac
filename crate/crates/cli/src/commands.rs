//! One function per subcommand. Each returns the text for stdout plus any diagnostics for
//! stderr, so the binary only has to print and pick an exit code.

use std::fs;
use std::path::Path;

use patrolscope_core::aggregation::{build_view, AggregationRule, ViewState};
use patrolscope_core::dot::to_dot;
use patrolscope_core::layout::{init_layout, run_until_converged, LayoutParams};
use patrolscope_core::matrix::{from_matrix, parse_location_map, TransitionMatrix};
use patrolscope_core::reachability::loop_break_sweep;
use patrolscope_core::report::{analyze, round9};
use patrolscope_core::{fixtures, parse_strategy, spawn_agents, Strategy};
use serde_json::{json, Value};

use crate::Failure;

/// Successful command output.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    /// JSON lines for stderr.
    pub diagnostics: Vec<Value>,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

pub fn load(path: &Path) -> Result<Strategy, Failure> {
    Ok(parse_strategy(&read(path)?)?)
}

fn warnings(strategy: &Strategy) -> Vec<Value> {
    strategy
        .warnings()
        .into_iter()
        .map(|w| {
            let mut v = serde_json::to_value(w).expect("warnings serialize");
            v["level"] = json!("warning");
            v
        })
        .collect()
}

fn pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

pub fn validate(path: &Path) -> Result<Output, Failure> {
    let s = load(path)?;
    Ok(Output {
        stdout: pretty(&json!({
            "valid": true,
            "name": s.name(),
            "locations": s.locations().len(),
            "nodes": s.node_count(),
            "edges": s.edges().len(),
            "sha256": s.digest(),
        })),
        diagnostics: warnings(&s),
    })
}

/// Report JSON. With `report_path` the report goes to that file and stdout stays empty.
pub fn analyze_cmd(path: &Path, seed: Option<u64>, report_path: Option<&Path>) -> Result<Output, Failure> {
    let s = load(path)?;
    let text = analyze(&s, seed)?.to_json();
    let stdout = match report_path {
        Some(out) => {
            fs::write(out, &text).map_err(|e| Failure::io(out, e))?;
            String::new()
        }
        None => text,
    };
    Ok(Output {
        stdout,
        diagnostics: warnings(&s),
    })
}

pub fn simulate(
    path: &Path,
    start: &str,
    count: usize,
    horizon: usize,
    seed: u64,
) -> Result<Output, Failure> {
    let s = load(path)?;
    let ens = spawn_agents(&s, start, count, horizon, seed)?;
    let occupancy: Vec<Vec<usize>> = (0..=horizon)
        .map(|t| ens.occupancy(t))
        .collect::<Result<_, _>>()?;
    Ok(Output {
        stdout: pretty(&json!({
            "name": s.name(),
            "start": start,
            "count": count,
            "horizon": horizon,
            "seed": seed,
            "order": ens.node_ids(),
            "occupancy": occupancy,
            "single_agent": ens.single_agent(),
        })),
        diagnostics: warnings(&s),
    })
}

/// Loop-break thresholds on the node-level view, or on the location-level view with
/// `closed`.
pub fn sweep(path: &Path, closed: bool, rule: AggregationRule) -> Result<Output, Failure> {
    let s = load(path)?;
    let mut view = if closed {
        ViewState::closed()
    } else {
        ViewState::all_open(&s)
    };
    view.rule = rule;
    let g = build_view(&s, &view)?;
    let rows: Vec<Value> = loop_break_sweep(&g, &g.weights())
        .into_iter()
        .map(|b| {
            let ids: Vec<&str> = b.newly_abandoned.iter().map(|&i| g.elements[i].id.as_str()).collect();
            json!({ "threshold": round9(b.threshold), "newly_abandoned": ids })
        })
        .collect();
    Ok(Output {
        stdout: pretty(&json!({
            "name": s.name(),
            "view": if closed { "locations" } else { "nodes" },
            "rule": rule,
            "breaks": rows,
        })),
        diagnostics: warnings(&s),
    })
}

pub fn layout(
    path: &Path,
    params: LayoutParams,
    open: &[String],
    open_all: bool,
    tolerance: f64,
    max_iter: usize,
) -> Result<Output, Failure> {
    let s = load(path)?;
    params.validate()?;
    let mut view = if open_all {
        ViewState::all_open(&s)
    } else {
        ViewState::closed()
    };
    for loc in open {
        s.require_location(loc)?;
        view.open_locations.insert(loc.clone());
    }
    let g = build_view(&s, &view)?;
    let state = init_layout(&g, &params);
    let (done, report) = run_until_converged(&state, &g, &params, tolerance, max_iter)?;
    Ok(Output {
        stdout: pretty(&json!({
            "name": s.name(),
            "seed": params.seed,
            "iterations": report.iterations,
            "converged": report.converged,
            "max_displacement": report.max_displacement,
            "positions": done.snapshot(&g, &params),
        })),
        diagnostics: warnings(&s),
    })
}

pub fn export_dot(path: &Path) -> Result<Output, Failure> {
    let s = load(path)?;
    Ok(Output {
        stdout: to_dot(&s),
        diagnostics: warnings(&s),
    })
}

/// Strategy document from a CSV transition matrix and a `node_id,location_id` map.
pub fn import(matrix: &Path, locations: &Path, name: &str) -> Result<Output, Failure> {
    let m = TransitionMatrix::from_csv(&read(matrix)?)?;
    let mapping = parse_location_map(&read(locations)?)?;
    let s = from_matrix(name, &m, &mapping)?;
    Ok(Output {
        stdout: s.to_json(),
        diagnostics: warnings(&s),
    })
}

/// Built-in example strategies, by name.
pub const GENERATORS: [&str; 6] = ["three-node", "corridor", "airport", "hidden-ring", "office", "two-cycle"];

pub fn generate(kind: &str, n: usize, memory: bool) -> Result<Output, Failure> {
    let s = match kind {
        "three-node" => fixtures::three_node(),
        "corridor" => fixtures::generate_corridor(n, memory),
        "airport" => fixtures::airport(),
        "hidden-ring" => fixtures::hidden_ring(),
        "office" => fixtures::office(),
        "two-cycle" => fixtures::two_cycle(),
        other => {
            return Err(patrolscope_core::Error::InvalidArgument(format!(
                "unknown generator `{other}`, expected one of {}",
                GENERATORS.join(", ")
            ))
            .into())
        }
    };
    Ok(Output {
        stdout: s.to_json(),
        diagnostics: Vec::new(),
    })
}
