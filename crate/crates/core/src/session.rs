//! One loaded strategy plus everything an interactive explorer needs around it.
//!
//! A [`Session`] owns the strategy, the current [`ViewState`], a layout and an optional agent
//! ensemble. Every successful mutation bumps the revision counter and every payload names the
//! revision it reflects. Derived data is cached: the stationary distribution and flows for
//! the lifetime of the session (the strategy never changes), visit series per
//! `(start, horizon)`, and loop reports per threshold until the view changes.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::aggregation::{
    aggregate_stationary, build_view, AggregationRule, DisplayMode, ElementKind, ViewGraph,
    ViewState,
};
use crate::analysis::{
    edge_flow, stationary_distribution, visit_distribution, EdgeFlowMap, FlowMode,
    StationaryDistribution, VisitDistributionSeries, DEFAULT_HORIZON,
};
use crate::error::{Error, Result};
use crate::layout::{
    init_layout, run_until_converged, step_in_place, LayoutParams, LayoutSnapshot, LayoutState,
};
use crate::matrix::{to_matrix, TransitionMatrix};
use crate::reachability::{loop_report, LoopReport};
use crate::simulation::{spawn_agents, AgentEnsemble, Occupancy, DEFAULT_AGENTS};
use crate::strategy::{Strategy, StrategyDocument, Warning};

pub const DEFAULT_LAYOUT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_LAYOUT_MAX_ITER: usize = 2000;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    pub strategy: StrategyDocument,
    #[serde(default)]
    pub layout_seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CreateResponse {
    pub session: String,
    pub revision: u64,
    pub name: String,
    pub layout_seed: u64,
    pub nodes: usize,
    pub locations: usize,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ElementPayload {
    pub id: String,
    pub kind: ElementKind,
    pub location: String,
    pub open: bool,
    pub x: f64,
    pub y: f64,
    /// Stationary mass, absent when the chain has no unique stationary distribution.
    pub mass: Option<f64>,
    pub on_loop: bool,
    pub scc: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgePayload {
    /// Element indices.
    pub from: usize,
    pub to: usize,
    /// Weight shown in the current display mode; thresholding applies to this value.
    pub weight: f64,
    /// Aggregated transition probability under the current rule.
    pub probability: f64,
    pub internal: bool,
    pub visible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocationPayload {
    pub id: String,
    pub label: String,
    pub open: bool,
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub mass: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodePayload {
    pub id: String,
    pub location: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphPayload {
    pub revision: u64,
    pub name: String,
    pub threshold: f64,
    pub rule: AggregationRule,
    pub display_mode: DisplayMode,
    pub layout_iteration: usize,
    pub elements: Vec<ElementPayload>,
    pub edges: Vec<EdgePayload>,
    pub locations: Vec<LocationPayload>,
    pub nodes: Vec<NodePayload>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdRequest {
    pub threshold: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleRequest {
    pub rule: AggregationRule,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeRequest {
    pub mode: DisplayMode,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionRequest {
    pub start: String,
    /// Node or location id; a location sums over its members.
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionPayload {
    pub revision: u64,
    pub start: String,
    pub horizon: usize,
    pub order: Vec<String>,
    /// `rows[t - 1]` is the distribution after `t` steps.
    pub rows: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    /// Probability of being at the target after `t = 1..=horizon` steps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_series: Option<Vec<f64>>,
    /// Stationary mass of the target, when defined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_stationary: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixPayload {
    pub revision: u64,
    pub order: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsRequest {
    pub start: String,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgentsPayload {
    pub revision: u64,
    pub start: String,
    pub count: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Node ids visited by agent 0, `horizon + 1` entries.
    pub single_agent: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CursorRequest {
    pub t: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OccupancyPayload {
    pub revision: u64,
    #[serde(flatten)]
    pub occupancy: Occupancy,
    /// Where agent 0 is at the cursor.
    pub single_agent_at: String,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutStepRequest {
    /// Number of steps when not converging; defaults to 1.
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub converge: bool,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LayoutPayload {
    pub revision: u64,
    pub steps: usize,
    pub converged: Option<bool>,
    pub max_displacement: f64,
    #[serde(flatten)]
    pub snapshot: LayoutSnapshot,
}

#[derive(Debug, Clone)]
pub struct Session {
    strategy: Strategy,
    matrix: TransitionMatrix,
    view: ViewState,
    graph: ViewGraph,
    params: LayoutParams,
    layout: LayoutState,
    stationary: std::result::Result<StationaryDistribution, Error>,
    flows: Option<EdgeFlowMap>,
    visits: HashMap<(usize, usize), Arc<VisitDistributionSeries>>,
    loops: HashMap<u64, Arc<LoopReport>>,
    ensemble: Option<AgentEnsemble>,
    revision: u64,
}

impl Session {
    /// New session with every location closed. The revision starts at 1.
    pub fn new(strategy: Strategy, params: LayoutParams) -> Result<Session> {
        params.validate()?;
        let matrix = to_matrix(&strategy);
        let stationary = stationary_distribution(&matrix);
        let flows = match &stationary {
            Ok(pi) => Some(edge_flow(&strategy, pi, FlowMode::Absolute)?),
            Err(_) => None,
        };
        let view = ViewState::closed();
        let graph = build_view(&strategy, &view)?;
        let layout = init_layout(&graph, &params);
        Ok(Session {
            strategy,
            matrix,
            view,
            graph,
            params,
            layout,
            stationary,
            flows,
            visits: HashMap::new(),
            loops: HashMap::new(),
            ensemble: None,
            revision: 1,
        })
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    pub fn view(&self) -> &ViewState {
        &self.view
    }

    pub fn view_graph(&self) -> &ViewGraph {
        &self.graph
    }

    pub fn layout(&self) -> &LayoutState {
        &self.layout
    }

    pub fn layout_params(&self) -> &LayoutParams {
        &self.params
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn stationary(&self) -> Result<&StationaryDistribution> {
        self.stationary.as_ref().map_err(Clone::clone)
    }

    fn bump(&mut self) {
        self.revision += 1;
    }

    /// Weights shown for the current display mode, one per view edge.
    pub fn display_weights(&self) -> Vec<f64> {
        match (self.view.display_mode, &self.flows) {
            (DisplayMode::PathPreference, Some(flows)) => {
                self.graph.path_preference_weights(flows, true)
            }
            _ => self.graph.weights(),
        }
    }

    pub fn loop_report(&mut self) -> Arc<LoopReport> {
        let key = self.view.threshold.to_bits();
        if let Some(r) = self.loops.get(&key) {
            return Arc::clone(r);
        }
        let report = Arc::new(loop_report(
            &self.graph,
            &self.display_weights(),
            self.view.threshold,
        ));
        self.loops.insert(key, Arc::clone(&report));
        report
    }

    fn apply_view(&mut self, view: ViewState) -> Result<()> {
        let graph = build_view(&self.strategy, &view)?;
        self.view = view;
        self.graph = graph;
        self.layout.open.clone_from(&self.graph.open);
        self.loops.clear();
        self.bump();
        Ok(())
    }

    pub fn graph(&mut self) -> GraphPayload {
        let loops = self.loop_report();
        let weights = self.display_weights();
        let element_mass = self
            .stationary
            .as_ref()
            .ok()
            .map(|pi| aggregate_stationary(pi, &self.graph).expect("same node order"));
        let location_mass = self.stationary.as_ref().ok().map(|pi| {
            self.strategy
                .locations()
                .iter()
                .map(|l| l.members.iter().map(|&n| pi.mass[n]).sum::<f64>())
                .collect::<Vec<f64>>()
        });
        let snapshot = self.layout.snapshot(&self.graph, &self.params);

        let elements = self
            .graph
            .elements
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let p = self.layout.element_position(&self.graph, i);
                ElementPayload {
                    id: e.id.clone(),
                    kind: e.kind,
                    location: self.graph.location_ids[e.location].clone(),
                    open: self.graph.open[e.location],
                    x: p.x,
                    y: p.y,
                    mass: element_mass.as_ref().map(|m| m[i]),
                    on_loop: loops.on_loop[i],
                    scc: loops.scc_id[i],
                }
            })
            .collect();
        let edges = self
            .graph
            .edges
            .iter()
            .zip(&weights)
            .map(|(e, &w)| EdgePayload {
                from: e.from,
                to: e.to,
                weight: w,
                probability: e.weight,
                internal: e.internal,
                visible: w > self.view.threshold,
            })
            .collect();
        let locations = self
            .strategy
            .locations()
            .iter()
            .zip(snapshot.locations)
            .enumerate()
            .map(|(l, (loc, placed))| LocationPayload {
                id: loc.id.clone(),
                label: loc.label.clone(),
                open: placed.open,
                x: placed.x,
                y: placed.y,
                radius: placed.radius,
                mass: location_mass.as_ref().map(|m| m[l]),
            })
            .collect();
        let nodes = snapshot
            .nodes
            .into_iter()
            .map(|n| NodePayload {
                id: n.id,
                location: n.location,
                x: n.x,
                y: n.y,
            })
            .collect();

        GraphPayload {
            revision: self.revision,
            name: self.strategy.name().to_owned(),
            threshold: self.view.threshold,
            rule: self.view.rule,
            display_mode: self.view.display_mode,
            layout_iteration: self.layout.iteration,
            elements,
            edges,
            locations,
            nodes,
        }
    }

    pub fn set_threshold(&mut self, threshold: f64) -> Result<GraphPayload> {
        let mut view = self.view.clone();
        view.set_threshold(threshold)?;
        self.view = view;
        self.bump();
        Ok(self.graph())
    }

    pub fn toggle_location(&mut self, location: &str) -> Result<GraphPayload> {
        self.strategy.require_location(location)?;
        let mut view = self.view.clone();
        view.toggle(location);
        self.apply_view(view)?;
        Ok(self.graph())
    }

    pub fn set_rule(&mut self, rule: AggregationRule) -> Result<GraphPayload> {
        let mut view = self.view.clone();
        view.rule = rule;
        self.apply_view(view)?;
        Ok(self.graph())
    }

    /// Path-preference mode needs a unique stationary distribution.
    pub fn set_mode(&mut self, mode: DisplayMode) -> Result<GraphPayload> {
        if mode == DisplayMode::PathPreference {
            self.stationary()?;
        }
        let mut view = self.view.clone();
        view.display_mode = mode;
        self.apply_view(view)?;
        Ok(self.graph())
    }

    fn visit_series(&mut self, start: usize, horizon: usize) -> Result<Arc<VisitDistributionSeries>> {
        if let Some(s) = self.visits.get(&(start, horizon)) {
            return Ok(Arc::clone(s));
        }
        let id = &self.strategy.nodes()[start].id;
        let series = Arc::new(visit_distribution(&self.matrix, id, horizon)?);
        self.visits.insert((start, horizon), Arc::clone(&series));
        Ok(series)
    }

    /// Visit distribution from a memory node, optionally focused on a node or location.
    pub fn distribution(&mut self, request: &DistributionRequest) -> Result<DistributionPayload> {
        let start = self.strategy.require_node(&request.start)?;
        let horizon = request.horizon.unwrap_or(DEFAULT_HORIZON);
        let target_nodes: Option<Vec<usize>> = match &request.target {
            None => None,
            Some(t) => Some(match self.strategy.node_index(t) {
                Some(n) => vec![n],
                None => self.strategy.locations()[self.strategy.require_location(t)?]
                    .members
                    .clone(),
            }),
        };
        let series = self.visit_series(start, horizon)?;
        let target_series = target_nodes.as_ref().map(|nodes| {
            series
                .rows
                .iter()
                .map(|row| nodes.iter().map(|&n| row[n]).sum())
                .collect()
        });
        let target_stationary = match (&target_nodes, &self.stationary) {
            (Some(nodes), Ok(pi)) => Some(nodes.iter().map(|&n| pi.mass[n]).sum()),
            _ => None,
        };
        Ok(DistributionPayload {
            revision: self.revision,
            start: request.start.clone(),
            horizon,
            order: series.order.clone(),
            rows: series.rows.clone(),
            target: request.target.clone(),
            target_series,
            target_stationary,
        })
    }

    pub fn matrix(&self) -> MatrixPayload {
        MatrixPayload {
            revision: self.revision,
            order: self.matrix.order().to_vec(),
            rows: self.matrix.rows(),
        }
    }

    /// Replaces the ensemble. The seed must already be resolved by the caller.
    pub fn spawn_agents(
        &mut self,
        start: &str,
        count: Option<usize>,
        horizon: Option<usize>,
        seed: u64,
    ) -> Result<AgentsPayload> {
        let ensemble = spawn_agents(
            &self.strategy,
            start,
            count.unwrap_or(DEFAULT_AGENTS),
            horizon.unwrap_or(DEFAULT_HORIZON),
            seed,
        )?;
        let payload = AgentsPayload {
            revision: self.revision + 1,
            start: ensemble.start().to_owned(),
            count: ensemble.count(),
            horizon: ensemble.horizon(),
            seed,
            single_agent: ensemble.single_agent(),
        };
        self.ensemble = Some(ensemble);
        self.bump();
        Ok(payload)
    }

    fn ensemble(&self) -> Result<&AgentEnsemble> {
        self.ensemble
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("no agents have been spawned".into()))
    }

    pub fn occupancy(&self) -> Result<OccupancyPayload> {
        let ensemble = self.ensemble()?;
        let occupancy = ensemble.occupancy_at_cursor();
        let at = ensemble.path(0).expect("at least one agent")[occupancy.t];
        Ok(OccupancyPayload {
            revision: self.revision,
            single_agent_at: ensemble.node_ids()[at as usize].clone(),
            occupancy,
        })
    }

    pub fn set_cursor(&mut self, t: usize) -> Result<OccupancyPayload> {
        self.ensemble
            .as_mut()
            .ok_or_else(|| Error::InvalidArgument("no agents have been spawned".into()))?
            .set_cursor(t)?;
        self.bump();
        self.occupancy()
    }

    pub fn step_layout(&mut self, request: &LayoutStepRequest) -> Result<LayoutPayload> {
        let (steps, converged, max_displacement) = if request.converge {
            let tolerance = request.tolerance.unwrap_or(DEFAULT_LAYOUT_TOLERANCE);
            let max_iter = request.max_iter.unwrap_or(DEFAULT_LAYOUT_MAX_ITER);
            let (state, report) =
                run_until_converged(&self.layout, &self.graph, &self.params, tolerance, max_iter)?;
            self.layout = state;
            (report.iterations, Some(report.converged), report.max_displacement)
        } else {
            let steps = request.steps.unwrap_or(1);
            let mut max_displacement: f64 = 0.0;
            for _ in 0..steps {
                max_displacement = step_in_place(&mut self.layout, &self.graph, &self.params);
            }
            (steps, None, max_displacement)
        };
        self.bump();
        Ok(LayoutPayload {
            revision: self.revision,
            steps,
            converged,
            max_displacement,
            snapshot: self.layout.snapshot(&self.graph, &self.params),
        })
    }
}
