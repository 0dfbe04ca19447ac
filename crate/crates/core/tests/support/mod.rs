//! Independent reference computations for the integration and acceptance suites.
//!
//! Nothing here calls into the analysis code under test: linear systems are solved with a
//! hand-written Gaussian elimination, strongly connected components come from brute-force
//! pairwise reachability, and aggregated weights are recomputed from the raw edge list.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use patrolscope_core::aggregation::AggregationRule;
use patrolscope_core::fixtures;
use patrolscope_core::Strategy;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        assert!(a[pivot][col].abs() > 1e-14, "singular system");
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

/// Stationary vector from `(Pᵀ - I) π = 0` with the last equation replaced by `Σ π = 1`.
pub fn oracle_stationary(p: &[Vec<f64>]) -> Vec<f64> {
    let n = p.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[n - 1] = vec![1.0; n];
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    gauss_solve(a, b)
}

/// Expected hitting time of `to` from `from` for an irreducible chain.
pub fn oracle_hitting_time(p: &[Vec<f64>], from: usize, to: usize) -> f64 {
    if from == to {
        return 0.0;
    }
    let others: Vec<usize> = (0..p.len()).filter(|&i| i != to).collect();
    let m = others.len();
    let mut a = vec![vec![0.0; m]; m];
    for (r, &i) in others.iter().enumerate() {
        for (c, &j) in others.iter().enumerate() {
            a[r][c] = if i == j { 1.0 } else { 0.0 } - p[i][j];
        }
    }
    let h = gauss_solve(a, vec![1.0; m]);
    h[others.iter().position(|&i| i == from).unwrap()]
}

/// `x P` computed densely.
pub fn oracle_step(x: &[f64], p: &[Vec<f64>]) -> Vec<f64> {
    let n = x.len();
    (0..n).map(|j| (0..n).map(|i| x[i] * p[i][j]).sum()).collect()
}

pub fn dense(strategy: &Strategy) -> Vec<Vec<f64>> {
    let n = strategy.node_count();
    let mut p = vec![vec![0.0; n]; n];
    for e in strategy.edges() {
        p[e.from][e.to] += e.p;
    }
    p
}

/// Partition into mutually reachable classes, by BFS from every vertex.
pub fn oracle_scc_partition(n: usize, links: &[(usize, usize)]) -> BTreeSet<BTreeSet<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in links {
        adj[a].push(b);
    }
    let reach: Vec<Vec<bool>> = (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            seen
        })
        .collect();
    (0..n)
        .map(|i| (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect())
        .collect()
}

pub fn partition_of(scc: &[usize]) -> BTreeSet<BTreeSet<usize>> {
    let mut groups: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (v, &c) in scc.iter().enumerate() {
        groups.entry(c).or_default().insert(v);
    }
    groups.into_values().collect()
}

/// Element label of every node under `open`: the node id if its location is open, otherwise
/// the location id.
pub fn element_of(strategy: &Strategy, open: &BTreeSet<String>) -> Vec<String> {
    strategy
        .nodes()
        .iter()
        .map(|n| {
            let loc = &strategy.locations()[n.location];
            if open.contains(&loc.id) {
                format!("node:{}", n.id)
            } else {
                format!("loc:{}", loc.id)
            }
        })
        .collect()
}

/// Aggregated weights keyed by element labels, recomputed from the raw edges.
pub fn oracle_aggregate(
    strategy: &Strategy,
    open: &BTreeSet<String>,
    rule: AggregationRule,
) -> BTreeMap<(String, String), f64> {
    let element = element_of(strategy, open);
    let mut size: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &element {
        *size.entry(e).or_default() += 1;
    }
    let mut parallel: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for e in strategy.edges() {
        parallel
            .entry((element[e.from].clone(), element[e.to].clone()))
            .or_default()
            .push(e.p);
    }
    parallel
        .into_iter()
        .map(|(key, ps)| {
            let w = match rule {
                AggregationRule::Sum => ps.iter().sum(),
                AggregationRule::Max => ps.iter().copied().fold(0.0, f64::max),
                AggregationRule::Average => ps.iter().sum::<f64>() / size[key.0.as_str()] as f64,
            };
            (key, w)
        })
        .collect()
}

/// Every named fixture used by the suites.
pub fn all_fixtures() -> Vec<(&'static str, Strategy)> {
    vec![
        ("three-node", fixtures::three_node()),
        ("three-node-shared", fixtures::three_node_in(["A", "A", "B"])),
        ("two-cycle", fixtures::two_cycle()),
        ("coin-flip", fixtures::coin_flip_pair()),
        ("complete-5", fixtures::uniform_complete(5)),
        ("corridor-4-plain", fixtures::generate_corridor(4, false)),
        ("corridor-4-memory", fixtures::generate_corridor(4, true)),
        ("airport", fixtures::airport()),
        ("hidden-ring", fixtures::hidden_ring()),
        ("office", fixtures::office()),
    ]
}

/// Seeded generator for test inputs.
pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }
}

/// Random directed graph on at most `max_n` vertices.
pub fn random_graph(rng: &mut TestRng, max_n: usize) -> (usize, Vec<(usize, usize)>) {
    let n = 1 + rng.below(max_n);
    let density = 1 + rng.below(3);
    let mut links = BTreeSet::new();
    for _ in 0..n * density {
        links.insert((rng.below(n), rng.below(n)));
    }
    (n, links.into_iter().collect())
}

/// Random subset of the strategy's locations.
pub fn random_open_set(rng: &mut TestRng, strategy: &Strategy) -> BTreeSet<String> {
    strategy
        .locations()
        .iter()
        .filter(|_| rng.coin())
        .map(|l| l.id.clone())
        .collect()
}
