//! Analysis of randomized patrol strategies modelled as Markov chains over memory nodes.
//!
//! A [`Strategy`] groups memory nodes into physical locations and gives next-step
//! probabilities between nodes. On top of it this crate computes stationary behaviour,
//! hitting times and short-horizon visit distributions ([`analysis`]), location-level views
//! ([`aggregation`]), loop structure under edge thresholds ([`reachability`]), a
//! force-directed drawing ([`layout`]) and seeded agent ensembles ([`simulation`]).
//! [`session`] ties these together behind a stateful, revisioned interface.

pub mod aggregation;
pub mod analysis;
pub mod dot;
pub mod error;
pub mod fixtures;
pub mod layout;
pub mod matrix;
pub mod reachability;
pub mod report;
pub mod session;
pub mod simulation;
pub mod strategy;

pub use aggregation::{build_view, AggregationRule, DisplayMode, ViewGraph, ViewState};
pub use analysis::{
    direct_path_probability, edge_flow, expected_hitting_time, stationary_distribution,
    visit_distribution, EdgeFlowMap, FlowMode, StationaryDistribution, VisitDistributionSeries,
};
pub use error::{Error, Result};
pub use layout::{init_layout, run_until_converged, step_layout, LayoutParams, LayoutState};
pub use matrix::{from_matrix, to_matrix, TransitionMatrix};
pub use reachability::{filter_edges, loop_break_sweep, loop_report, strongly_connected_components};
pub use report::{analyze, AnalysisReport};
pub use session::Session;
pub use simulation::{spawn_agents, AgentEnsemble};
pub use strategy::{parse_strategy, Strategy, StrategyBuilder};
