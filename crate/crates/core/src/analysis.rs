//! Long-term and transient behaviour of a strategy's Markov chain.

use std::sync::atomic::{AtomicBool, Ordering};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::TransitionMatrix;
use crate::reachability;
use crate::strategy::Strategy;

/// Steps shown by the recurring-visits view.
pub const DEFAULT_HORIZON: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDistribution {
    pub order: Vec<String>,
    pub mass: Vec<f64>,
}

impl StationaryDistribution {
    /// `max_j |(πP)_j - π_j|`.
    pub fn residual(&self, matrix: &TransitionMatrix) -> f64 {
        let next = step(&matrix.sparse_rows(), &self.mass);
        next.iter()
            .zip(&self.mass)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StationaryOptions<'a> {
    /// Stop once successive iterates differ by less than this in max norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Polled between iterations.
    pub cancel: Option<&'a AtomicBool>,
}

impl Default for StationaryOptions<'_> {
    fn default() -> Self {
        StationaryOptions {
            tolerance: 1e-12,
            max_iterations: 1_000_000,
            cancel: None,
        }
    }
}

/// `v ↦ vP` over sparse rows.
fn step(rows: &[Vec<(usize, f64)>], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (i, row) in rows.iter().enumerate() {
        let vi = v[i];
        if vi == 0.0 {
            continue;
        }
        for &(j, p) in row {
            out[j] += vi * p;
        }
    }
    out
}

pub fn stationary_distribution(matrix: &TransitionMatrix) -> Result<StationaryDistribution> {
    stationary_distribution_with(matrix, StationaryOptions::default())
}

/// Power iteration on the lazy chain `(P + I) / 2`, which has the same stationary vector as
/// `P` and is aperiodic. Transient nodes are allowed as long as there is exactly one closed
/// class.
pub fn stationary_distribution_with(
    matrix: &TransitionMatrix,
    options: StationaryOptions<'_>,
) -> Result<StationaryDistribution> {
    let n = matrix.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let links = matrix.links();
    let scc = reachability::strongly_connected_components(n, &links);
    let closed = reachability::closed_classes(&scc, &links).len();
    if closed != 1 {
        return Err(Error::NotIrreducible {
            closed_classes: closed,
        });
    }

    let rows = matrix.sparse_rows();
    let mut current = vec![1.0 / n as f64; n];
    for iteration in 1..=options.max_iterations {
        if iteration % 1024 == 0 && options.cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Err(Error::Cancelled);
        }
        let moved = step(&rows, &current);
        let mut delta: f64 = 0.0;
        let next: Vec<f64> = current
            .iter()
            .zip(&moved)
            .map(|(x, y)| {
                let z = 0.5 * (x + y);
                delta = delta.max((z - x).abs());
                z
            })
            .collect();
        current = next;
        if delta < options.tolerance {
            let total: f64 = current.iter().sum();
            current.iter_mut().for_each(|x| *x /= total);
            return Ok(StationaryDistribution {
                order: matrix.order().to_vec(),
                mass: current,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: options.max_iterations,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    #[default]
    Absolute,
    /// Divided by the largest flow.
    Relative,
}

/// Stationary flow `π_i · P_ij` for every strategy edge, in edge order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeFlowMap {
    pub mode: FlowMode,
    pub flows: Vec<f64>,
    absolute: Vec<f64>,
}

impl EdgeFlowMap {
    pub fn absolute(&self) -> &[f64] {
        &self.absolute
    }
}

pub fn edge_flow(
    strategy: &Strategy,
    pi: &StationaryDistribution,
    mode: FlowMode,
) -> Result<EdgeFlowMap> {
    check_order(strategy, pi)?;
    let absolute: Vec<f64> = strategy
        .edges()
        .iter()
        .map(|e| pi.mass[e.from] * e.p)
        .collect();
    let flows = match mode {
        FlowMode::Absolute => absolute.clone(),
        FlowMode::Relative => {
            let max = absolute.iter().copied().fold(0.0, f64::max);
            absolute.iter().map(|f| if max > 0.0 { f / max } else { 0.0 }).collect()
        }
    };
    Ok(EdgeFlowMap {
        mode,
        flows,
        absolute,
    })
}

fn check_order(strategy: &Strategy, pi: &StationaryDistribution) -> Result<()> {
    let same = pi.order.len() == strategy.node_count()
        && pi.order.iter().zip(strategy.nodes()).all(|(a, b)| *a == b.id);
    if same {
        Ok(())
    } else {
        Err(Error::OrderMismatch)
    }
}

/// Share of time spent in each location, in location order.
pub fn location_mass(pi: &StationaryDistribution, strategy: &Strategy) -> Result<Vec<f64>> {
    check_order(strategy, pi)?;
    Ok(strategy
        .locations()
        .iter()
        .map(|l| l.members.iter().map(|&n| pi.mass[n]).sum())
        .collect())
}

/// Distribution of the walk started at `start` for each step `1..=horizon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisitDistributionSeries {
    pub start: String,
    pub horizon: usize,
    pub order: Vec<String>,
    /// `rows[t - 1]` is the distribution after `t` steps.
    pub rows: Vec<Vec<f64>>,
}

impl VisitDistributionSeries {
    /// Probability of being at `node` for each step `1..=horizon`.
    pub fn series_for(&self, node: &str) -> Result<Vec<f64>> {
        let j = self
            .order
            .iter()
            .position(|o| o == node)
            .ok_or_else(|| Error::UnknownReference {
                kind: "node",
                id: node.to_owned(),
            })?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn visit_distribution(
    matrix: &TransitionMatrix,
    start: &str,
    horizon: usize,
) -> Result<VisitDistributionSeries> {
    let s = matrix.index_of(start)?;
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let rows_sparse = matrix.sparse_rows();
    let mut v = vec![0.0; matrix.len()];
    v[s] = 1.0;
    let mut rows = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        v = step(&rows_sparse, &v);
        rows.push(v.clone());
    }
    Ok(VisitDistributionSeries {
        start: start.to_owned(),
        horizon,
        order: matrix.order().to_vec(),
        rows,
    })
}

/// Expected number of steps to first reach `to` from `from`.
pub fn expected_hitting_time(matrix: &TransitionMatrix, from: &str, to: &str) -> Result<f64> {
    let f = matrix.index_of(from)?;
    let t = matrix.index_of(to)?;
    hitting_times_to(matrix, t)[f].ok_or_else(|| Error::Unreachable {
        from: from.to_owned(),
        to: to.to_owned(),
    })
}

/// Expected hitting time of `target` from every node; `None` where it is infinite.
///
/// Solves `h_target = 0`, `h_i = 1 + Σ_j P_ij h_j` by dense LU restricted to the nodes that
/// reach the target almost surely.
pub fn hitting_times_to(matrix: &TransitionMatrix, target: usize) -> Vec<Option<f64>> {
    let n = matrix.len();
    let rows = matrix.sparse_rows();

    // Nodes that can reach the target at all.
    let mut reaches = vec![false; n];
    reaches[target] = true;
    let mut frontier = vec![target];
    let mut incoming = vec![Vec::new(); n];
    for (i, row) in rows.iter().enumerate() {
        for &(j, _) in row {
            incoming[j].push(i);
        }
    }
    while let Some(v) = frontier.pop() {
        for &u in &incoming[v] {
            if !reaches[u] {
                reaches[u] = true;
                frontier.push(u);
            }
        }
    }
    // Drop nodes that can step out of the set until none can: the rest hit the target a.s.
    loop {
        let mut changed = false;
        for i in 0..n {
            if i != target && reaches[i] && rows[i].iter().any(|&(j, _)| !reaches[j]) {
                reaches[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let unknowns: Vec<usize> = (0..n).filter(|&i| i != target && reaches[i]).collect();
    let mut slot = vec![usize::MAX; n];
    for (k, &i) in unknowns.iter().enumerate() {
        slot[i] = k;
    }
    let m = unknowns.len();
    let mut out = vec![None; n];
    out[target] = Some(0.0);
    if m == 0 {
        return out;
    }
    let mut a = DMatrix::<f64>::identity(m, m);
    for (k, &i) in unknowns.iter().enumerate() {
        for &(j, p) in &rows[i] {
            if j != target {
                a[(k, slot[j])] -= p;
            }
        }
    }
    let solved = a
        .lu()
        .solve(&DVector::from_element(m, 1.0))
        .expect("restricted hitting-time system is nonsingular");
    for (k, &i) in unknowns.iter().enumerate() {
        out[i] = Some(solved[k]);
    }
    out
}

/// Probability that the walk follows `path` exactly. Unknown nodes or missing edges give 0.
pub fn direct_path_probability<S: AsRef<str>>(strategy: &Strategy, path: &[S]) -> f64 {
    let indices: Option<Vec<usize>> = path.iter().map(|id| strategy.node_index(id.as_ref())).collect();
    match indices {
        Some(idx) => idx
            .windows(2)
            .map(|w| strategy.probability(w[0], w[1]))
            .product(),
        None => 0.0,
    }
}

/// Total-variation distance `½ Σ |row_t - π|` for every step of the series.
pub fn tv_to_stationary(
    series: &VisitDistributionSeries,
    pi: &StationaryDistribution,
) -> Result<Vec<f64>> {
    if series.order != pi.order {
        return Err(Error::OrderMismatch);
    }
    Ok(series
        .rows
        .iter()
        .map(|row| total_variation(row, &pi.mass))
        .collect())
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
