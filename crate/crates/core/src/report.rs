//! Self-contained analysis report for batch use.
//!
//! Every number is rounded to 9 significant digits so that the serialized report is stable
//! across platforms and can be compared byte for byte.

use serde::Serialize;

use crate::aggregation::{build_view, ViewState};
use crate::analysis::{
    edge_flow, hitting_times_to, location_mass, stationary_distribution, total_variation,
    visit_distribution, FlowMode, DEFAULT_HORIZON,
};
use crate::error::Result;
use crate::matrix::to_matrix;
use crate::reachability::loop_break_sweep;
use crate::simulation::{spawn_agents, DEFAULT_AGENTS};
use crate::strategy::{Strategy, Warning};

/// Pairwise hitting times are only tabulated up to this many nodes.
pub const HITTING_TABLE_LIMIT: usize = 64;
/// TV level used for the per-node mixing time.
pub const MIXING_LEVEL: f64 = 0.01;

/// Rounds to 9 significant digits.
pub fn round9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mass {
    pub id: String,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowRow {
    pub from: String,
    pub to: String,
    pub p: f64,
    pub absolute: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingTable {
    pub order: Vec<String>,
    /// `steps[i][j]`: expected steps from node `i` to first reach node `j`; null when node `j`
    /// is not reached almost surely.
    pub steps: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub newly_abandoned: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingRow {
    pub start: String,
    pub tv_1: f64,
    pub tv_10: f64,
    pub tv_100: f64,
    pub peak_tv: f64,
    pub peak_t: usize,
    /// First step at which TV drops below the mixing level, if within the horizon.
    pub mixed_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub start: String,
    pub agents: usize,
    pub horizon: usize,
    /// Largest TV distance between empirical occupancy and the exact distribution over t.
    pub max_tv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub name: String,
    pub sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub nodes: usize,
    pub locations: usize,
    pub stationary: Vec<Mass>,
    pub location_mass: Vec<Mass>,
    pub flows: Vec<FlowRow>,
    pub hitting_times: Option<HittingTable>,
    pub loop_breaks: Vec<SweepRow>,
    pub mixing: Vec<MixingRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSummary>,
    pub warnings: Vec<Warning>,
    pub notes: Vec<String>,
}

impl AnalysisReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Full batch analysis. With a seed, the report also carries an agent-ensemble check started
/// from the first node.
pub fn analyze(strategy: &Strategy, seed: Option<u64>) -> Result<AnalysisReport> {
    let matrix = to_matrix(strategy);
    let pi = stationary_distribution(&matrix)?;
    let absolute = edge_flow(strategy, &pi, FlowMode::Absolute)?;
    let relative = edge_flow(strategy, &pi, FlowMode::Relative)?;
    let masses = location_mass(&pi, strategy)?;
    let ids = strategy.node_ids();
    let mut notes = Vec::new();

    let stationary = ids
        .iter()
        .zip(&pi.mass)
        .map(|(id, &m)| Mass { id: id.clone(), mass: round9(m) })
        .collect();
    let location_mass = strategy
        .locations()
        .iter()
        .zip(masses)
        .map(|(l, m)| Mass { id: l.id.clone(), mass: round9(m) })
        .collect();
    let flows = strategy
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| FlowRow {
            from: ids[e.from].clone(),
            to: ids[e.to].clone(),
            p: round9(e.p),
            absolute: round9(absolute.flows[k]),
            relative: round9(relative.flows[k]),
        })
        .collect();

    let n = strategy.node_count();
    let hitting_times = if n <= HITTING_TABLE_LIMIT {
        let mut steps = vec![vec![None; n]; n];
        for target in 0..n {
            for (from, h) in hitting_times_to(&matrix, target).into_iter().enumerate() {
                steps[from][target] = h.map(round9);
            }
        }
        Some(HittingTable { order: ids.clone(), steps })
    } else {
        notes.push(format!(
            "hitting-time table omitted: {n} nodes exceeds the limit of {HITTING_TABLE_LIMIT}"
        ));
        None
    };

    let view = build_view(strategy, &ViewState::all_open(strategy))?;
    let loop_breaks = loop_break_sweep(&view, &view.weights())
        .into_iter()
        .map(|b| SweepRow {
            threshold: round9(b.threshold),
            newly_abandoned: b
                .newly_abandoned
                .iter()
                .map(|&i| view.elements[i].id.clone())
                .collect(),
        })
        .collect();

    let mut mixing = Vec::with_capacity(n);
    for id in &ids {
        let series = visit_distribution(&matrix, id, DEFAULT_HORIZON)?;
        let tv: Vec<f64> = series.rows.iter().map(|r| total_variation(r, &pi.mass)).collect();
        let (peak_i, peak) = tv
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
        mixing.push(MixingRow {
            start: id.clone(),
            tv_1: round9(tv[0]),
            tv_10: round9(tv[9]),
            tv_100: round9(tv[99]),
            peak_tv: round9(peak),
            peak_t: peak_i + 1,
            mixed_at: tv.iter().position(|&v| v < MIXING_LEVEL).map(|i| i + 1),
        });
    }

    let simulation = match seed {
        Some(seed) => {
            let start = &ids[0];
            let ensemble = spawn_agents(strategy, start, DEFAULT_AGENTS, DEFAULT_HORIZON, seed)?;
            let exact = visit_distribution(&matrix, start, DEFAULT_HORIZON)?;
            let mut max_tv: f64 = 0.0;
            for t in 1..=DEFAULT_HORIZON {
                let empirical: Vec<f64> = ensemble
                    .occupancy(t)?
                    .iter()
                    .map(|&c| c as f64 / DEFAULT_AGENTS as f64)
                    .collect();
                max_tv = max_tv.max(total_variation(&empirical, &exact.rows[t - 1]));
            }
            Some(SimulationSummary {
                start: start.clone(),
                agents: DEFAULT_AGENTS,
                horizon: DEFAULT_HORIZON,
                max_tv: round9(max_tv),
            })
        }
        None => None,
    };

    Ok(AnalysisReport {
        name: strategy.name().to_owned(),
        sha256: strategy.digest(),
        seed,
        nodes: n,
        locations: strategy.locations().len(),
        stationary,
        location_mass,
        flows,
        hitting_times,
        loop_breaks,
        mixing,
        simulation,
        warnings: strategy.warnings(),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn rounding() {
        assert_eq!(round9(1.0 / 9.0), 0.111111111);
        assert_eq!(round9(2.0 / 3.0), 0.666666667);
        assert_eq!(round9(25.000000000000004), 25.0);
        assert_eq!(round9(0.0), 0.0);
        assert_eq!(round9(-0.0).to_bits(), 0.0f64.to_bits());
        assert_eq!(round9(123456789012.0), 123456789000.0);
    }

    #[test]
    fn three_node_report() {
        let r = analyze(&fixtures::three_node(), None).unwrap();
        let pi: Vec<f64> = r.stationary.iter().map(|m| m.mass).collect();
        assert_eq!(pi, vec![0.111111111, 0.666666667, 0.222222222]);
        assert!(r.to_json().contains("0.666666667"));
        assert!(!r.to_json().contains("\"seed\""));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn corridor_end_to_end_hitting_time() {
        let s = fixtures::generate_corridor(4, false);
        let r = analyze(&s, None).unwrap();
        let table = r.hitting_times.unwrap();
        let a = table.order.iter().position(|x| x == "e0").unwrap();
        let b = table.order.iter().position(|x| x == "e5").unwrap();
        assert_eq!(table.steps[a][b], Some(25.0));
    }

    #[test]
    fn hidden_ring_sweep_starts_at_escape_probability() {
        let r = analyze(&fixtures::hidden_ring(), None).unwrap();
        assert_eq!(r.loop_breaks[0].threshold, 0.001);
    }

    #[test]
    fn seeded_report_is_reproducible() {
        let s = fixtures::office();
        let a = analyze(&s, Some(7)).unwrap().to_json();
        assert_eq!(a, analyze(&s, Some(7)).unwrap().to_json());
        assert!(a.contains("\"seed\": 7"));
    }
}
