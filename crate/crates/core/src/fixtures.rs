//! Analytic and synthetic strategies.
//!
//! [`generate_corridor`] reproduces the corridor walk with and without memory nodes. The
//! other constructors are small reconstructions of typical real-world strategy shapes and
//! are used throughout the test suites.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::strategy::{Strategy, StrategyBuilder};

fn build(builder: StrategyBuilder) -> Strategy {
    builder.build().expect("fixture strategies are valid by construction")
}

/// Three memory nodes in three locations with transition matrix
/// `[[0, 1, 0], [0, 2/3, 1/3], [1/2, 1/2, 0]]`.
pub fn three_node() -> Strategy {
    three_node_in(["A", "B", "C"])
}

/// The three-node example with a caller-chosen location for each node.
pub fn three_node_in(locations: [&str; 3]) -> Strategy {
    let mut b = StrategyBuilder::new("three-node example");
    let mut declared: Vec<&str> = Vec::new();
    for loc in locations {
        if !declared.contains(&loc) {
            declared.push(loc);
            b = b.location(loc, loc);
        }
    }
    for (i, loc) in locations.iter().enumerate() {
        b = b.node(i.to_string(), *loc);
    }
    build(
        b.edge("0", "1", 1.0)
            .edge("1", "1", 2.0 / 3.0)
            .edge("1", "2", 1.0 / 3.0)
            .edge("2", "0", 0.5)
            .edge("2", "1", 0.5),
    )
}

/// Two single-node locations alternating deterministically.
pub fn two_cycle() -> Strategy {
    build(
        StrategyBuilder::new("two-cycle")
            .location("A", "A")
            .location("B", "B")
            .node("a", "A")
            .node("b", "B")
            .edge("a", "b", 1.0)
            .edge("b", "a", 1.0),
    )
}

/// Two single-node locations, each staying or switching with probability 1/2.
pub fn coin_flip_pair() -> Strategy {
    build(
        StrategyBuilder::new("coin-flip pair")
            .location("A", "A")
            .location("B", "B")
            .node("a", "A")
            .node("b", "B")
            .edge("a", "a", 0.5)
            .edge("a", "b", 0.5)
            .edge("b", "a", 0.5)
            .edge("b", "b", 0.5),
    )
}

/// Complete graph with self-loops on `k` single-node locations, every entry `1/k`.
pub fn uniform_complete(k: usize) -> Strategy {
    let mut b = StrategyBuilder::new(format!("uniform-{k}"));
    for i in 0..k {
        b = b.location(format!("L{i}"), format!("L{i}")).node(format!("n{i}"), format!("L{i}"));
    }
    for i in 0..k {
        for j in 0..k {
            b = b.edge(format!("n{i}"), format!("n{j}"), 1.0 / k as f64);
        }
    }
    build(b)
}

/// Corridor with `n` intersections between two dead ends.
///
/// Without memory every location holds one node; ends bounce back with probability 1 and
/// intersections step either way with probability 1/2. With memory each intersection holds a
/// "heading right" node `r{i}` and a "heading left" node `l{i}`, and the walk is a single
/// deterministic round trip of length `2n + 2`.
///
/// Locations are `loc0 ..= loc{n+1}`. The end nodes are `e0` and `e{n+1}`; plain interior
/// nodes are `c{i}`.
pub fn generate_corridor(n: usize, with_memory: bool) -> Strategy {
    let last = n + 1;
    let kind = if with_memory { "memory" } else { "plain" };
    let mut b = StrategyBuilder::new(format!("corridor-{n}-{kind}"));
    for i in 0..=last {
        b = b.location(format!("loc{i}"), format!("Corridor {i}"));
    }
    let end = |i: usize| format!("e{i}");
    b = b.node(end(0), "loc0");
    if with_memory {
        let right = |i: usize| if i == last { end(last) } else { format!("r{i}") };
        let left = |i: usize| if i == 0 { end(0) } else { format!("l{i}") };
        for i in 1..=n {
            b = b.node(right(i), format!("loc{i}")).node(left(i), format!("loc{i}"));
        }
        b = b.node(end(last), format!("loc{last}"));
        b = b.edge(end(0), right(1), 1.0);
        for i in 1..=n {
            b = b.edge(right(i), right(i + 1), 1.0);
        }
        b = b.edge(end(last), left(n), 1.0);
        for i in (1..=n).rev() {
            b = b.edge(left(i), left(i - 1), 1.0);
        }
    } else {
        let node = |i: usize| if i == 0 || i == last { end(i) } else { format!("c{i}") };
        for i in 1..=n {
            b = b.node(node(i), format!("loc{i}"));
        }
        b = b.node(end(last), format!("loc{last}"));
        b = b.edge(end(0), node(1), 1.0);
        for i in 1..=n {
            b = b.edge(node(i), node(i - 1), 0.5).edge(node(i), node(i + 1), 0.5);
        }
        b = b.edge(end(last), node(n), 1.0);
    }
    build(b)
}

/// Node ids of the straight left-to-right walk through a corridor built by
/// [`generate_corridor`].
pub fn corridor_straight_path(n: usize, with_memory: bool) -> Vec<String> {
    let mut path = vec!["e0".to_string()];
    for i in 1..=n {
        path.push(if with_memory { format!("r{i}") } else { format!("c{i}") });
    }
    path.push(format!("e{}", n + 1));
    path
}

/// Airport: a central location with three halls, each leading to a gate.
///
/// The central location holds a working node `c0` and a nearly unused node `cx` which is only
/// entered through edges of probability at most 0.02.
pub fn airport() -> Strategy {
    let mut b = StrategyBuilder::new("airport")
        .location("C", "Central")
        .node("c0", "C")
        .node("cx", "C");
    for i in 1..=3 {
        b = b
            .location(format!("H{i}"), format!("Hall {i}"))
            .location(format!("G{i}"), format!("Gate {i}"))
            .node(format!("h{i}_out"), format!("H{i}"))
            .node(format!("h{i}_back"), format!("H{i}"))
            .node(format!("g{i}"), format!("G{i}"));
    }
    let into_cx = [0.02, 0.01, 0.015];
    let from_cx = [0.4, 0.3, 0.3];
    for i in 1..=3 {
        b = b
            .edge("c0", format!("h{i}_out"), 1.0 / 3.0)
            .edge(format!("h{i}_out"), format!("g{i}"), 1.0)
            .edge(format!("g{i}"), format!("h{i}_back"), 1.0)
            .edge(format!("h{i}_back"), "c0", 1.0 - into_cx[i - 1])
            .edge(format!("h{i}_back"), "cx", into_cx[i - 1])
            .edge("cx", format!("h{i}_out"), from_cx[i - 1]);
    }
    build(b)
}

/// Inner loop `i0 -> i1 -> i2 -> i3 -> i0` whose only exit is an edge `i3 -> o0` of
/// probability 0.001 into an outer ring `o0 -> ... -> o5 -> i0`.
pub fn hidden_ring() -> Strategy {
    let mut b = StrategyBuilder::new("hidden outer ring");
    for i in 0..4 {
        b = b
            .location(format!("I{i}"), format!("Inner {i}"))
            .node(format!("i{i}"), format!("I{i}"));
    }
    for k in 0..OUTER_RING {
        b = b
            .location(format!("O{k}"), format!("Outer {k}"))
            .node(format!("o{k}"), format!("O{k}"));
    }
    b = b
        .edge("i0", "i1", 1.0)
        .edge("i1", "i2", 1.0)
        .edge("i2", "i3", 1.0)
        .edge("i3", "i0", 0.999)
        .edge("i3", "o0", 0.001);
    for k in 0..OUTER_RING - 1 {
        b = b.edge(format!("o{k}"), format!("o{}", k + 1), 1.0);
    }
    b = b.edge(format!("o{}", OUTER_RING - 1), "i0", 1.0);
    build(b)
}

const OUTER_RING: usize = 6;

/// Memory-less office building: a one-way circular hallway of six junctions `h0..h5`, each
/// with two or three side offices. Every location holds a single node.
pub fn office() -> Strategy {
    const JUNCTIONS: usize = 6;
    let offices = [2, 3, 2, 3, 2, 3];
    let mut b = StrategyBuilder::new("office");
    for (i, &count) in offices.iter().enumerate() {
        b = b
            .location(format!("H{i}"), format!("Hallway {i}"))
            .node(format!("h{i}"), format!("H{i}"));
        for k in 0..count {
            b = b
                .location(format!("R{i}_{k}"), format!("Office {i}.{k}"))
                .node(format!("r{i}_{k}"), format!("R{i}_{k}"));
        }
    }
    for (i, &count) in offices.iter().enumerate() {
        let next = format!("h{}", (i + 1) % JUNCTIONS);
        b = b.edge(format!("h{i}"), next.clone(), 0.4);
        for k in 0..count {
            let office = format!("r{i}_{k}");
            b = b
                .edge(format!("h{i}"), office.clone(), 0.6 / count as f64)
                .edge(office.clone(), format!("h{i}"), 0.7)
                .edge(office, next.clone(), 0.3);
        }
    }
    build(b)
}

/// Random irreducible strategy with `1..=max_locations` locations holding
/// `1..=max_nodes_per_location` memory nodes each.
///
/// Irreducibility comes from a random Hamiltonian cycle over all nodes; extra edges are added
/// with random positive weights and every row is normalised.
pub fn random_strategy(seed: u64, max_locations: usize, max_nodes_per_location: usize) -> Strategy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let below = |rng: &mut ChaCha8Rng, n: usize| (rng.next_u64() % n as u64) as usize;
    let unit = |rng: &mut ChaCha8Rng| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;

    let locations = 1 + below(&mut rng, max_locations);
    let mut b = StrategyBuilder::new(format!("random-{seed}"));
    let mut nodes = Vec::new();
    for l in 0..locations {
        b = b.location(format!("L{l}"), format!("L{l}"));
        for m in 0..1 + below(&mut rng, max_nodes_per_location) {
            let id = format!("L{l}.{m}");
            b = b.node(id.clone(), format!("L{l}"));
            nodes.push(id);
        }
    }
    let n = nodes.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, below(&mut rng, i + 1));
    }
    let mut targets: Vec<Vec<usize>> = vec![Vec::new(); n];
    for k in 0..n {
        targets[perm[k]].push(perm[(k + 1) % n]);
    }
    for row in targets.iter_mut() {
        let extra = below(&mut rng, 4.min(n));
        for _ in 0..extra {
            let j = below(&mut rng, n);
            if !row.contains(&j) {
                row.push(j);
            }
        }
    }
    for (i, row) in targets.iter().enumerate() {
        let weights: Vec<f64> = row.iter().map(|_| 0.05 + unit(&mut rng)).collect();
        let total: f64 = weights.iter().sum();
        for (&j, w) in row.iter().zip(weights) {
            b = b.edge(nodes[i].clone(), nodes[j].clone(), w / total);
        }
    }
    build(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::to_matrix;

    #[test]
    fn degenerate_corridor() {
        let s = generate_corridor(0, false);
        assert_eq!(s.locations().len(), 2);
        assert_eq!(s.edges().len(), 2);
        assert!(s.edges().iter().all(|e| e.p == 1.0));
    }

    #[test]
    fn plain_corridor_shape() {
        let s = generate_corridor(2, false);
        assert_eq!(s.locations().len(), 4);
        assert_eq!(s.edges().len(), 6);
        let m = to_matrix(&s);
        assert_eq!(m.row(1), &[0.5, 0.0, 0.5, 0.0]);
        assert_eq!(m.row(2), &[0.0, 0.5, 0.0, 0.5]);
    }

    #[test]
    fn memory_corridor_shape() {
        let s = generate_corridor(2, true);
        assert_eq!(s.locations().len(), 4);
        assert_eq!(s.node_count(), 6);
        assert!(s.edges().iter().all(|e| e.p == 1.0));
        // one loop through all six nodes
        let mut at = 0;
        let mut visited = vec![false; 6];
        for _ in 0..6 {
            assert!(!visited[at]);
            visited[at] = true;
            at = s.edges()[s.outgoing(at)[0]].to;
        }
        assert_eq!(at, 0);
    }

    #[test]
    fn memory_corridor_is_single_cycle_for_all_n() {
        for n in 0..20 {
            let s = generate_corridor(n, true);
            assert_eq!(s.node_count(), 2 * n + 2);
            let mut indegree = vec![0; s.node_count()];
            for node in 0..s.node_count() {
                assert_eq!(s.outgoing(node).len(), 1);
            }
            for e in s.edges() {
                indegree[e.to] += 1;
            }
            assert!(indegree.iter().all(|&d| d == 1));
            assert!(s.warnings().is_empty());
        }
    }

    #[test]
    fn plain_corridor_is_stochastic() {
        for n in 0..20 {
            let m = to_matrix(&generate_corridor(n, false));
            for i in 0..m.len() {
                let sum: f64 = m.row(i).iter().sum();
                assert!((sum - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn case_fixtures_are_irreducible() {
        for s in [airport(), hidden_ring(), office(), three_node()] {
            assert!(s.warnings().is_empty(), "{}", s.name());
        }
        for seed in 0..50 {
            assert!(random_strategy(seed, 30, 10).warnings().is_empty());
        }
    }

    #[test]
    fn random_strategy_is_deterministic() {
        assert_eq!(random_strategy(7, 10, 4), random_strategy(7, 10, 4));
    }
}
