//! Collapsing memory nodes into their locations.
//!
//! A [`ViewState`] says which locations are open. In the resulting [`ViewGraph`] an open
//! location contributes each of its memory nodes as a separate element, a closed location
//! contributes one element. Node-level edges that end up parallel are merged by an
//! [`AggregationRule`]; edges internal to a closed location become a self-edge on it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::analysis::{EdgeFlowMap, StationaryDistribution};
use crate::error::{Error, Result};
use crate::strategy::Strategy;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationRule {
    Sum,
    Max,
    /// Sum of parallel edges divided by the source element's memory-node count. The only rule
    /// that keeps the view a Markov chain.
    #[default]
    Average,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisplayMode {
    #[default]
    Strategy,
    PathPreference,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ViewState {
    pub open_locations: BTreeSet<String>,
    pub rule: AggregationRule,
    pub threshold: f64,
    pub display_mode: DisplayMode,
}

impl ViewState {
    /// Every location closed, average rule, no threshold.
    pub fn closed() -> Self {
        Self::default()
    }

    /// Every location of `strategy` open.
    pub fn all_open(strategy: &Strategy) -> Self {
        ViewState {
            open_locations: strategy.locations().iter().map(|l| l.id.clone()).collect(),
            ..Self::default()
        }
    }

    pub fn set_threshold(&mut self, threshold: f64) -> Result<()> {
        if !(0.0..1.0).contains(&threshold) {
            return Err(Error::InvalidArgument(format!(
                "threshold {threshold} outside [0, 1)"
            )));
        }
        self.threshold = threshold;
        Ok(())
    }

    /// Flips a location between open and closed; returns whether it is now open.
    pub fn toggle(&mut self, location: &str) -> bool {
        if self.open_locations.remove(location) {
            false
        } else {
            self.open_locations.insert(location.to_owned());
            true
        }
    }

    pub fn is_open(&self, location: &str) -> bool {
        self.open_locations.contains(location)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Location,
    Node,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Element {
    pub kind: ElementKind,
    pub id: String,
    /// Location index for `Location` elements, node index for `Node` elements.
    #[serde(skip)]
    pub index: usize,
    /// Owning location index.
    #[serde(skip)]
    pub location: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewEdge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
    /// Edge produced from connections internal to a closed location.
    pub internal: bool,
    /// Indices into the strategy's edge list.
    pub provenance: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewGraph {
    pub elements: Vec<Element>,
    pub edges: Vec<ViewEdge>,
    pub rule: AggregationRule,
    /// Per location.
    pub open: Vec<bool>,
    /// Per location, node indices.
    pub members: Vec<Vec<usize>>,
    /// Per node, the element it is drawn as (itself or its closed location).
    pub node_element: Vec<usize>,
    /// Per strategy edge: `(from node, to node, p)`.
    pub node_edges: Vec<(usize, usize, f64)>,
    pub node_ids: Vec<String>,
    pub location_ids: Vec<String>,
}

impl ViewGraph {
    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    pub fn links(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.from, e.to)).collect()
    }

    /// Memory-node count behind an element.
    pub fn multiplicity(&self, element: usize) -> usize {
        let e = &self.elements[element];
        match e.kind {
            ElementKind::Location => self.members[e.index].len(),
            ElementKind::Node => 1,
        }
    }

    pub fn element_index(&self, id: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.id == id)
    }

    /// Stationary edge flows summed per view edge. With `relative` the values are divided by
    /// their maximum.
    pub fn path_preference_weights(&self, flows: &EdgeFlowMap, relative: bool) -> Vec<f64> {
        let absolute = flows.absolute();
        let summed: Vec<f64> = self
            .edges
            .iter()
            .map(|e| e.provenance.iter().map(|&k| absolute[k]).sum())
            .collect();
        let max = summed.iter().copied().fold(0.0, f64::max);
        if relative && max > 0.0 {
            summed.iter().map(|f| f / max).collect()
        } else {
            summed
        }
    }
}

pub fn build_view(strategy: &Strategy, view: &ViewState) -> Result<ViewGraph> {
    for id in &view.open_locations {
        strategy.require_location(id)?;
    }

    let mut elements = Vec::new();
    let mut node_element = vec![0; strategy.node_count()];
    let mut open = Vec::with_capacity(strategy.locations().len());
    let mut members = Vec::with_capacity(strategy.locations().len());
    for (li, loc) in strategy.locations().iter().enumerate() {
        let is_open = view.is_open(&loc.id);
        if is_open {
            for &n in &loc.members {
                node_element[n] = elements.len();
                elements.push(Element {
                    kind: ElementKind::Node,
                    id: strategy.nodes()[n].id.clone(),
                    index: n,
                    location: li,
                });
            }
        } else {
            for &n in &loc.members {
                node_element[n] = elements.len();
            }
            elements.push(Element {
                kind: ElementKind::Location,
                id: loc.id.clone(),
                index: li,
                location: li,
            });
        }
        open.push(is_open);
        members.push(loc.members.clone());
    }

    let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (k, e) in strategy.edges().iter().enumerate() {
        groups
            .entry((node_element[e.from], node_element[e.to]))
            .or_default()
            .push(k);
    }

    let mut graph = ViewGraph {
        elements,
        edges: Vec::with_capacity(groups.len()),
        rule: view.rule,
        open,
        members,
        node_element,
        node_edges: strategy.edges().iter().map(|e| (e.from, e.to, e.p)).collect(),
        node_ids: strategy.node_ids(),
        location_ids: strategy.locations().iter().map(|l| l.id.clone()).collect(),
    };
    for ((from, to), provenance) in groups {
        let ps = provenance.iter().map(|&k| strategy.edges()[k].p);
        let weight = match view.rule {
            AggregationRule::Sum => ps.sum(),
            AggregationRule::Max => ps.fold(0.0, f64::max),
            AggregationRule::Average => ps.sum::<f64>() / graph.multiplicity(from) as f64,
        };
        let internal = from == to && graph.elements[from].kind == ElementKind::Location;
        graph.edges.push(ViewEdge {
            from,
            to,
            weight,
            internal,
            provenance,
        });
    }
    Ok(graph)
}

/// Stationary mass per view element: a closed location carries the sum over its members.
pub fn aggregate_stationary(pi: &StationaryDistribution, graph: &ViewGraph) -> Result<Vec<f64>> {
    if pi.order != graph.node_ids {
        return Err(Error::OrderMismatch);
    }
    let mut mass = vec![0.0; graph.element_count()];
    for (node, &element) in graph.node_element.iter().enumerate() {
        mass[element] += pi.mass[node];
    }
    Ok(mass)
}
