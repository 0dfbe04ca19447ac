//! Edge thresholding and loop detection.
//!
//! An element is *on a loop* when it belongs to a strongly connected component of at least two
//! elements, or to a singleton component with a surviving self-edge. Everything else is
//! abandoned: a patrol can pass through it at most once.

use serde::Serialize;

use crate::aggregation::ViewGraph;

/// Kosaraju-Sharir with iterative DFS.
///
/// Returns a component id per vertex. Ids follow reverse topological order of the
/// condensation: component 0 has no edges to other components. Traversal order follows vertex
/// order and link order, so the numbering is deterministic.
pub fn strongly_connected_components(n: usize, links: &[(usize, usize)]) -> Vec<usize> {
    let mut forward = vec![Vec::new(); n];
    let mut backward = vec![Vec::new(); n];
    for &(a, b) in links {
        forward[a].push(b);
        backward[b].push(a);
    }

    // First pass on the transposed graph gives finishing order.
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        stack.push((root, 0));
        while let Some((v, next)) = stack.last_mut() {
            if let Some(&w) = backward[*v].get(*next) {
                *next += 1;
                if !visited[w] {
                    visited[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(*v);
                stack.pop();
            }
        }
    }

    // Second pass on the original graph, latest finisher first.
    const UNASSIGNED: usize = usize::MAX;
    let mut component = vec![UNASSIGNED; n];
    let mut count = 0;
    let mut frontier = Vec::new();
    for &root in order.iter().rev() {
        if component[root] != UNASSIGNED {
            continue;
        }
        component[root] = count;
        frontier.push(root);
        while let Some(v) = frontier.pop() {
            for &w in &forward[v] {
                if component[w] == UNASSIGNED {
                    component[w] = count;
                    frontier.push(w);
                }
            }
        }
        count += 1;
    }
    component
}

/// Components with no link leaving them.
pub fn closed_classes(scc: &[usize], links: &[(usize, usize)]) -> Vec<usize> {
    let count = scc.iter().copied().max().map_or(0, |m| m + 1);
    let mut leaks = vec![false; count];
    for &(a, b) in links {
        if scc[a] != scc[b] {
            leaks[scc[a]] = true;
        }
    }
    (0..count).filter(|&c| !leaks[c]).collect()
}

/// Indices of edges whose weight is strictly above `threshold`.
pub fn filter_edges(graph: &ViewGraph, weights: &[f64], threshold: f64) -> Vec<usize> {
    debug_assert_eq!(weights.len(), graph.edges.len());
    (0..graph.edges.len())
        .filter(|&k| weights[k] > threshold)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopReport {
    pub threshold: f64,
    pub surviving_edges: Vec<usize>,
    pub scc_id: Vec<usize>,
    pub on_loop: Vec<bool>,
    /// Element indices not on any loop, ascending.
    pub abandoned: Vec<usize>,
}

/// Loop membership of every element of `graph` once edges at or below `threshold` are removed.
/// `weights` are the displayed weights, one per view edge.
pub fn loop_report(graph: &ViewGraph, weights: &[f64], threshold: f64) -> LoopReport {
    let n = graph.element_count();
    let surviving_edges = filter_edges(graph, weights, threshold);
    let links: Vec<(usize, usize)> = surviving_edges
        .iter()
        .map(|&k| (graph.edges[k].from, graph.edges[k].to))
        .collect();
    let scc_id = strongly_connected_components(n, &links);
    let mut size = vec![0usize; n];
    for &c in &scc_id {
        size[c] += 1;
    }
    let mut on_loop: Vec<bool> = scc_id.iter().map(|&c| size[c] >= 2).collect();
    for &(a, b) in &links {
        if a == b {
            on_loop[a] = true;
        }
    }
    let abandoned = (0..n).filter(|&i| !on_loop[i]).collect();
    LoopReport {
        threshold,
        surviving_edges,
        scc_id,
        on_loop,
        abandoned,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopBreak {
    pub threshold: f64,
    /// Element indices that leave every loop at this threshold, ascending.
    pub newly_abandoned: Vec<usize>,
}

/// Thresholds at which the abandoned set grows, ascending.
///
/// Candidate thresholds are exactly the distinct displayed weights below 1; the abandoned set
/// is constant between consecutive candidates.
pub fn loop_break_sweep(graph: &ViewGraph, weights: &[f64]) -> Vec<LoopBreak> {
    let mut candidates: Vec<f64> = weights.iter().copied().filter(|&w| w < 1.0).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut previous = loop_report(graph, weights, 0.0).on_loop;
    let mut breaks = Vec::new();
    for threshold in candidates {
        let report = loop_report(graph, weights, threshold);
        let newly_abandoned: Vec<usize> = (0..previous.len())
            .filter(|&i| previous[i] && !report.on_loop[i])
            .collect();
        if !newly_abandoned.is_empty() {
            breaks.push(LoopBreak {
                threshold,
                newly_abandoned,
            });
        }
        previous = report.on_loop;
    }
    breaks
}
