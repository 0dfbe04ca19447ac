//! Strategy data model: locations, memory nodes and the transition structure between them.
//!
//! A [`Strategy`] is always valid once constructed. Every constructor path (file parsing,
//! matrix import, fixtures) funnels through [`StrategyBuilder::build`], which enforces
//! referential integrity and row-stochasticity.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::reachability;

/// Maximum accepted deviation of a node's outgoing probability sum from 1.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub id: String,
    pub label: String,
    /// Indices into [`Strategy::nodes`], in declaration order.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryNode {
    pub id: String,
    /// Index into [`Strategy::locations`].
    pub location: usize,
}

/// A transition between two memory nodes, with `0 < p <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    name: String,
    locations: Vec<Location>,
    nodes: Vec<MemoryNode>,
    edges: Vec<Edge>,
    node_index: HashMap<String, usize>,
    location_index: HashMap<String, usize>,
    outgoing: Vec<Vec<usize>>,
}

impl Strategy {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn nodes(&self) -> &[MemoryNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn location_index(&self, id: &str) -> Option<usize> {
        self.location_index.get(id).copied()
    }

    /// Like [`Strategy::node_index`] but reports a missing id as an error.
    pub fn require_node(&self, id: &str) -> Result<usize> {
        self.node_index(id).ok_or_else(|| Error::UnknownReference {
            kind: "node",
            id: id.to_owned(),
        })
    }

    pub fn require_location(&self, id: &str) -> Result<usize> {
        self.location_index(id).ok_or_else(|| Error::UnknownReference {
            kind: "location",
            id: id.to_owned(),
        })
    }

    /// Indices into [`Strategy::edges`] of the edges leaving `node`, in file order.
    pub fn outgoing(&self, node: usize) -> &[usize] {
        &self.outgoing[node]
    }

    /// Probability of the edge `from -> to`, or 0 if absent.
    pub fn probability(&self, from: usize, to: usize) -> f64 {
        self.outgoing[from]
            .iter()
            .map(|&e| self.edges[e])
            .find(|e| e.to == to)
            .map_or(0.0, |e| e.p)
    }

    pub fn node_ids(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.id.clone()).collect()
    }

    /// Non-fatal findings. Currently only reducibility of the node graph.
    pub fn warnings(&self) -> Vec<Warning> {
        let links: Vec<(usize, usize)> = self.edges.iter().map(|e| (e.from, e.to)).collect();
        let scc = reachability::strongly_connected_components(self.nodes.len(), &links);
        let components = scc.iter().copied().max().map_or(0, |m| m + 1);
        if components <= 1 {
            return Vec::new();
        }
        let closed = reachability::closed_classes(&scc, &links);
        vec![Warning {
            code: "Reducible",
            message: format!(
                "memory-node graph is not irreducible: {components} strongly connected components, {} closed",
                closed.len()
            ),
            components,
            closed_classes: closed.len(),
        }]
    }

    pub fn to_document(&self) -> StrategyDocument {
        StrategyDocument {
            name: self.name.clone(),
            locations: self
                .locations
                .iter()
                .map(|l| LocationDoc {
                    id: l.id.clone(),
                    label: Some(l.label.clone()),
                })
                .collect(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDoc {
                    id: n.id.clone(),
                    location: self.locations[n.location].id.clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    from: self.nodes[e.from].id.clone(),
                    to: self.nodes[e.to].id.clone(),
                    p: e.p,
                })
                .collect(),
        }
    }

    /// Pretty-printed JSON strategy file.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_document())
            .expect("strategy documents always serialize");
        out.push('\n');
        out
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn digest(&self) -> String {
        let bytes = Sha256::digest(self.to_json().as_bytes());
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Warning {
    pub code: &'static str,
    pub message: String,
    pub components: usize,
    pub closed_classes: usize,
}

/// On-disk strategy schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyDocument {
    pub name: String,
    pub locations: Vec<LocationDoc>,
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocationDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
    pub p: f64,
}

impl StrategyDocument {
    pub fn into_strategy(self) -> Result<Strategy> {
        let mut builder = StrategyBuilder::new(self.name);
        for l in self.locations {
            let label = l.label.unwrap_or_else(|| l.id.clone());
            builder = builder.location(l.id, label);
        }
        for n in self.nodes {
            builder = builder.node(n.id, n.location);
        }
        for e in self.edges {
            builder = builder.edge(e.from, e.to, e.p);
        }
        builder.build()
    }
}

/// Parses and validates a JSON strategy document.
pub fn parse_strategy(document: &str) -> Result<Strategy> {
    let doc: StrategyDocument =
        serde_json::from_str(document).map_err(|e| Error::MalformedDocument(e.to_string()))?;
    doc.into_strategy()
}

/// Accumulates string-keyed declarations and validates them all at once.
#[derive(Debug, Clone, Default)]
pub struct StrategyBuilder {
    name: String,
    locations: Vec<(String, String)>,
    nodes: Vec<(String, String)>,
    edges: Vec<(String, String, f64)>,
}

impl StrategyBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        StrategyBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn location(mut self, id: impl Into<String>, label: impl Into<String>) -> Self {
        self.locations.push((id.into(), label.into()));
        self
    }

    pub fn node(mut self, id: impl Into<String>, location: impl Into<String>) -> Self {
        self.nodes.push((id.into(), location.into()));
        self
    }

    pub fn edge(mut self, from: impl Into<String>, to: impl Into<String>, p: f64) -> Self {
        self.edges.push((from.into(), to.into(), p));
        self
    }

    pub fn build(self) -> Result<Strategy> {
        let mut location_index = HashMap::with_capacity(self.locations.len());
        let mut locations = Vec::with_capacity(self.locations.len());
        for (id, label) in self.locations {
            if location_index.insert(id.clone(), locations.len()).is_some() {
                return Err(Error::DuplicateId { kind: "location", id });
            }
            locations.push(Location {
                id,
                label,
                members: Vec::new(),
            });
        }

        let mut node_index = HashMap::with_capacity(self.nodes.len());
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (id, loc) in self.nodes {
            let location = *location_index
                .get(&loc)
                .ok_or_else(|| Error::UnknownReference {
                    kind: "location",
                    id: loc.clone(),
                })?;
            if node_index.insert(id.clone(), nodes.len()).is_some() {
                return Err(Error::DuplicateId { kind: "node", id });
            }
            locations[location].members.push(nodes.len());
            nodes.push(MemoryNode { id, location });
        }
        if let Some(empty) = locations.iter().find(|l| l.members.is_empty()) {
            return Err(Error::EmptyLocation(empty.id.clone()));
        }

        let mut edges: Vec<Edge> = Vec::with_capacity(self.edges.len());
        let mut outgoing = vec![Vec::new(); nodes.len()];
        for (from, to, p) in self.edges {
            let lookup = |id: &String| {
                node_index.get(id).copied().ok_or_else(|| Error::UnknownReference {
                    kind: "node",
                    id: id.clone(),
                })
            };
            let (f, t) = (lookup(&from)?, lookup(&to)?);
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability { from, to, p });
            }
            if p == 0.0 {
                continue;
            }
            if outgoing[f].iter().any(|&e: &usize| edges[e].to == t) {
                return Err(Error::DuplicateEdge { from, to });
            }
            outgoing[f].push(edges.len());
            edges.push(Edge { from: f, to: t, p });
        }

        for (i, node) in nodes.iter().enumerate() {
            let sum: f64 = outgoing[i].iter().map(|&e| edges[e].p).sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(Error::RowNotStochastic {
                    node: node.id.clone(),
                    sum,
                });
            }
        }

        Ok(Strategy {
            name: self.name,
            locations,
            nodes,
            edges,
            node_index,
            location_index,
            outgoing,
        })
    }
}
