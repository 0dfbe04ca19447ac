//! Python bindings for patrolscope.
//!
//! Structured results cross the boundary as plain Python objects (dicts, lists, floats)
//! built from the same serde representation the CLI and service emit.

use std::collections::BTreeSet;

use patrolscope_core::aggregation::{AggregationRule, DisplayMode};
use patrolscope_core::analysis::{self, FlowMode};
use patrolscope_core::session::{DistributionRequest, LayoutStepRequest};
use patrolscope_core::{
    build_view, dot, fixtures, layout, matrix, reachability, report, simulation, Error,
    LayoutParams, ViewState,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

create_exception!(
    patrolscope,
    PatrolscopeError,
    PyValueError,
    "Raised for invalid strategies or arguments; `code` holds the stable error code."
);

fn py_err(e: Error) -> PyErr {
    Python::attach(|py| {
        let err = PatrolscopeError::new_err(format!("{}: {e}", e.code()));
        let value = err.value(py);
        let _ = value.setattr("code", e.code());
        if let Ok(diag) = to_py(py, &e.diagnostic()) {
            let _ = value.setattr("diagnostic", diag);
        }
        err
    })
}

trait IntoPyResult<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for patrolscope_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value)
        .map_err(|e| PyValueError::new_err(format!("serialization failed: {e}")))?;
    Ok(py
        .import("json")?
        .call_method1("loads", (text,))?
        .unbind())
}

fn parse_enum<T: serde::de::DeserializeOwned>(what: &str, value: &str) -> PyResult<T> {
    serde_json::from_value(serde_json::Value::String(value.to_owned())).map_err(|_| {
        py_err(Error::InvalidArgument(format!("unknown {what} `{value}`")))
    })
}

/// A validated patrol strategy.
#[pyclass(frozen, module = "patrolscope")]
pub struct Strategy {
    inner: patrolscope_core::Strategy,
}

#[pymethods]
impl Strategy {
    /// Builds a strategy from `(id, label)` locations, `(id, location)` nodes and
    /// `(from, to, p)` edges.
    #[new]
    fn new(
        name: &str,
        locations: Vec<(String, String)>,
        nodes: Vec<(String, String)>,
        edges: Vec<(String, String, f64)>,
    ) -> PyResult<Self> {
        let mut b = patrolscope_core::StrategyBuilder::new(name);
        for (id, label) in locations {
            b = b.location(id, label);
        }
        for (id, loc) in nodes {
            b = b.node(id, loc);
        }
        for (from, to, p) in edges {
            b = b.edge(from, to, p);
        }
        Ok(Strategy { inner: b.build().py()? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Strategy {
            inner: patrolscope_core::parse_strategy(text).py()?,
        })
    }

    #[staticmethod]
    fn from_file(path: std::path::PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| {
            pyo3::exceptions::PyOSError::new_err(format!("{}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    /// Builds a strategy from a square matrix and a node to location map.
    #[staticmethod]
    fn from_matrix(
        name: &str,
        order: Vec<String>,
        rows: Vec<Vec<f64>>,
        locations: Vec<(String, String)>,
    ) -> PyResult<Self> {
        let m = matrix::TransitionMatrix::new(order, rows).py()?;
        Ok(Strategy {
            inner: matrix::from_matrix(name, &m, &locations).py()?,
        })
    }

    /// Built-in example: three-node, corridor, airport, hidden-ring, office, two-cycle.
    #[staticmethod]
    #[pyo3(signature = (kind, n=4, memory=false))]
    fn generate(kind: &str, n: usize, memory: bool) -> PyResult<Self> {
        let inner = match kind {
            "three-node" => fixtures::three_node(),
            "corridor" => fixtures::generate_corridor(n, memory),
            "airport" => fixtures::airport(),
            "hidden-ring" => fixtures::hidden_ring(),
            "office" => fixtures::office(),
            "two-cycle" => fixtures::two_cycle(),
            other => {
                return Err(py_err(Error::InvalidArgument(format!(
                    "unknown generator `{other}`"
                ))))
            }
        };
        Ok(Strategy { inner })
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn node_ids(&self) -> Vec<String> {
        self.inner.node_ids()
    }

    #[getter]
    fn location_ids(&self) -> Vec<String> {
        self.inner.locations().iter().map(|l| l.id.clone()).collect()
    }

    /// `(from, to, p)` in file order.
    #[getter]
    fn edges(&self) -> Vec<(String, String, f64)> {
        let ids = self.inner.node_ids();
        self.inner
            .edges()
            .iter()
            .map(|e| (ids[e.from].clone(), ids[e.to].clone(), e.p))
            .collect()
    }

    fn probability(&self, from: &str, to: &str) -> PyResult<f64> {
        let a = self.inner.require_node(from).py()?;
        let b = self.inner.require_node(to).py()?;
        Ok(self.inner.probability(a, b))
    }

    /// `(order, rows)` of the dense transition matrix.
    fn matrix(&self) -> (Vec<String>, Vec<Vec<f64>>) {
        let m = matrix::to_matrix(&self.inner);
        (m.order().to_vec(), m.rows())
    }

    fn warnings(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.warnings())
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_dot(&self) -> String {
        dot::to_dot(&self.inner)
    }

    /// SHA-256 of the canonical JSON form.
    fn digest(&self) -> String {
        self.inner.digest()
    }

    fn __len__(&self) -> usize {
        self.inner.node_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "Strategy(name={:?}, locations={}, nodes={}, edges={})",
            self.inner.name(),
            self.inner.locations().len(),
            self.inner.node_count(),
            self.inner.edges().len()
        )
    }
}

/// Stationary mass per node, in node order.
#[pyfunction]
fn stationary_distribution(py: Python<'_>, strategy: &Strategy) -> PyResult<Py<PyDict>> {
    let m = matrix::to_matrix(&strategy.inner);
    let pi = analysis::stationary_distribution(&m).py()?;
    let out = PyDict::new(py);
    for (id, mass) in m.order().iter().zip(&pi.mass) {
        out.set_item(id, mass)?;
    }
    Ok(out.unbind())
}

/// Stationary mass per location.
#[pyfunction]
fn location_mass(py: Python<'_>, strategy: &Strategy) -> PyResult<Py<PyDict>> {
    let m = matrix::to_matrix(&strategy.inner);
    let pi = analysis::stationary_distribution(&m).py()?;
    let masses = analysis::location_mass(&pi, &strategy.inner).py()?;
    let out = PyDict::new(py);
    for (loc, mass) in strategy.inner.locations().iter().zip(masses) {
        out.set_item(&loc.id, mass)?;
    }
    Ok(out.unbind())
}

/// Stationary flow on every edge as `(from, to, flow)`; `mode` is "absolute" or "relative".
#[pyfunction]
#[pyo3(signature = (strategy, mode="absolute"))]
fn edge_flow(strategy: &Strategy, mode: &str) -> PyResult<Vec<(String, String, f64)>> {
    let mode = match mode {
        "absolute" => FlowMode::Absolute,
        "relative" => FlowMode::Relative,
        other => {
            return Err(py_err(Error::InvalidArgument(format!(
                "unknown flow mode `{other}`"
            ))))
        }
    };
    let s = &strategy.inner;
    let pi = analysis::stationary_distribution(&matrix::to_matrix(s)).py()?;
    let flows = analysis::edge_flow(s, &pi, mode).py()?;
    let ids = s.node_ids();
    Ok(s.edges()
        .iter()
        .zip(&flows.flows)
        .map(|(e, &f)| (ids[e.from].clone(), ids[e.to].clone(), f))
        .collect())
}

/// Distribution after `t = 1..=horizon` steps from `start`; row `t - 1` is step `t`.
#[pyfunction]
#[pyo3(signature = (strategy, start, horizon=100))]
fn visit_distribution(strategy: &Strategy, start: &str, horizon: usize) -> PyResult<Vec<Vec<f64>>> {
    let m = matrix::to_matrix(&strategy.inner);
    Ok(analysis::visit_distribution(&m, start, horizon).py()?.rows)
}

#[pyfunction]
fn expected_hitting_time(strategy: &Strategy, start: &str, target: &str) -> PyResult<f64> {
    let m = matrix::to_matrix(&strategy.inner);
    analysis::expected_hitting_time(&m, start, target).py()
}

#[pyfunction]
fn direct_path_probability(strategy: &Strategy, path: Vec<String>) -> f64 {
    analysis::direct_path_probability(&strategy.inner, &path)
}

fn view_state(strategy: &Strategy, open: Option<Vec<String>>, rule: &str) -> PyResult<ViewState> {
    let mut view = ViewState::closed();
    if let Some(open) = open {
        for loc in &open {
            strategy.inner.require_location(loc).py()?;
        }
        view.open_locations = open.into_iter().collect::<BTreeSet<_>>();
    }
    view.rule = parse_enum::<AggregationRule>("aggregation rule", rule)?;
    Ok(view)
}

/// Loop membership after dropping view edges with weight at or below `threshold`.
///
/// `open` lists the locations drawn as individual memory nodes; the rest are aggregated with
/// `rule` ("sum", "max" or "average").
#[pyfunction]
#[pyo3(signature = (strategy, threshold=0.0, open=None, rule="average"))]
fn loop_report(
    py: Python<'_>,
    strategy: &Strategy,
    threshold: f64,
    open: Option<Vec<String>>,
    rule: &str,
) -> PyResult<Py<PyDict>> {
    let mut state = view_state(strategy, open, rule)?;
    state.set_threshold(threshold).py()?;
    let view = build_view(&strategy.inner, &state).py()?;
    let r = reachability::loop_report(&view, &view.weights(), threshold);
    let ids: Vec<&str> = view.elements.iter().map(|e| e.id.as_str()).collect();
    let out = PyDict::new(py);
    out.set_item("threshold", threshold)?;
    out.set_item("elements", &ids)?;
    out.set_item("on_loop", &r.on_loop)?;
    out.set_item("scc", &r.scc_id)?;
    out.set_item("surviving_edges", r.surviving_edges.len())?;
    out.set_item(
        "abandoned",
        r.abandoned.iter().map(|&i| ids[i]).collect::<Vec<_>>(),
    )?;
    Ok(out.unbind())
}

/// Thresholds at which elements leave every loop, as `(threshold, [element ids])`.
#[pyfunction]
#[pyo3(signature = (strategy, open=None, rule="average"))]
fn loop_break_sweep(
    strategy: &Strategy,
    open: Option<Vec<String>>,
    rule: &str,
) -> PyResult<Vec<(f64, Vec<String>)>> {
    let state = view_state(strategy, open, rule)?;
    let view = build_view(&strategy.inner, &state).py()?;
    Ok(reachability::loop_break_sweep(&view, &view.weights())
        .into_iter()
        .map(|b| {
            let ids = b
                .newly_abandoned
                .iter()
                .map(|&i| view.elements[i].id.clone())
                .collect();
            (b.threshold, ids)
        })
        .collect())
}

/// Force-directed layout run until the largest step is below `tolerance`.
#[pyfunction]
#[pyo3(signature = (strategy, seed=0, open=None, tolerance=1e-3, max_iter=2000))]
fn compute_layout(
    py: Python<'_>,
    strategy: &Strategy,
    seed: u64,
    open: Option<Vec<String>>,
    tolerance: f64,
    max_iter: usize,
) -> PyResult<Py<PyAny>> {
    let state = view_state(strategy, open, "average")?;
    let view = build_view(&strategy.inner, &state).py()?;
    let params = LayoutParams {
        seed,
        ..LayoutParams::default()
    };
    params.validate().py()?;
    let init = layout::init_layout(&view, &params);
    let (done, conv) = layout::run_until_converged(&init, &view, &params, tolerance, max_iter).py()?;
    let out = to_py(py, &done.snapshot(&view, &params))?;
    let dict = out.bind(py).cast::<PyDict>()?;
    dict.set_item("converged", conv.converged)?;
    dict.set_item("iterations", conv.iterations)?;
    dict.set_item("max_displacement", conv.max_displacement)?;
    Ok(out)
}

/// Full batch report as a dict. With a seed it includes an agent-ensemble check.
#[pyfunction]
#[pyo3(signature = (strategy, seed=None))]
fn analyze(py: Python<'_>, strategy: &Strategy, seed: Option<u64>) -> PyResult<Py<PyAny>> {
    to_py(py, &report::analyze(&strategy.inner, seed).py()?)
}

/// Same report as `analyze`, serialized exactly as the CLI writes it.
#[pyfunction]
#[pyo3(signature = (strategy, seed=None))]
fn analyze_json(strategy: &Strategy, seed: Option<u64>) -> PyResult<String> {
    Ok(report::analyze(&strategy.inner, seed).py()?.to_json())
}

/// Seeded ensemble of simulated patrols.
#[pyclass(module = "patrolscope")]
pub struct AgentEnsemble {
    inner: simulation::AgentEnsemble,
}

#[pymethods]
impl AgentEnsemble {
    #[getter]
    fn start(&self) -> &str {
        self.inner.start()
    }

    #[getter]
    fn count(&self) -> usize {
        self.inner.count()
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    #[getter]
    fn node_ids(&self) -> Vec<String> {
        self.inner.node_ids().to_vec()
    }

    /// Agent counts per node after `t` steps, in node order.
    fn occupancy(&self, t: usize) -> PyResult<Vec<usize>> {
        self.inner.occupancy(t).py()
    }

    /// Node ids visited by one agent, `horizon + 1` entries.
    #[pyo3(signature = (agent=0))]
    fn path(&self, agent: usize) -> PyResult<Vec<String>> {
        let ids = self.inner.node_ids();
        let path = self.inner.path(agent).ok_or_else(|| {
            py_err(Error::InvalidArgument(format!(
                "agent {agent} outside 0..{}",
                self.inner.count()
            )))
        })?;
        Ok(path.iter().map(|&n| ids[n as usize].clone()).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "AgentEnsemble(start={:?}, count={}, horizon={}, seed={})",
            self.inner.start(),
            self.inner.count(),
            self.inner.horizon(),
            self.inner.seed()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (strategy, start, count=400, horizon=100, seed=0))]
fn simulate(
    strategy: &Strategy,
    start: &str,
    count: usize,
    horizon: usize,
    seed: u64,
) -> PyResult<AgentEnsemble> {
    Ok(AgentEnsemble {
        inner: simulation::spawn_agents(&strategy.inner, start, count, horizon, seed).py()?,
    })
}

/// Stateful explorer session; every method returns the same payload as the HTTP service.
#[pyclass(module = "patrolscope")]
pub struct Session {
    inner: patrolscope_core::Session,
}

#[pymethods]
impl Session {
    #[new]
    #[pyo3(signature = (strategy, layout_seed=0))]
    fn new(strategy: &Strategy, layout_seed: u64) -> PyResult<Self> {
        let params = LayoutParams {
            seed: layout_seed,
            ..LayoutParams::default()
        };
        Ok(Session {
            inner: patrolscope_core::Session::new(strategy.inner.clone(), params).py()?,
        })
    }

    #[getter]
    fn revision(&self) -> u64 {
        self.inner.revision()
    }

    fn graph(&mut self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.graph())
    }

    fn set_threshold(&mut self, py: Python<'_>, threshold: f64) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.set_threshold(threshold).py()?)
    }

    fn toggle_location(&mut self, py: Python<'_>, location: &str) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.toggle_location(location).py()?)
    }

    fn set_rule(&mut self, py: Python<'_>, rule: &str) -> PyResult<Py<PyAny>> {
        let rule = parse_enum::<AggregationRule>("aggregation rule", rule)?;
        to_py(py, &self.inner.set_rule(rule).py()?)
    }

    fn set_mode(&mut self, py: Python<'_>, mode: &str) -> PyResult<Py<PyAny>> {
        let mode = parse_enum::<DisplayMode>("display mode", mode)?;
        to_py(py, &self.inner.set_mode(mode).py()?)
    }

    #[pyo3(signature = (start, target=None, horizon=None))]
    fn distribution(
        &mut self,
        py: Python<'_>,
        start: String,
        target: Option<String>,
        horizon: Option<usize>,
    ) -> PyResult<Py<PyAny>> {
        let request = DistributionRequest {
            start,
            target,
            horizon,
        };
        to_py(py, &self.inner.distribution(&request).py()?)
    }

    fn matrix(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.matrix())
    }

    #[pyo3(signature = (start, count=None, horizon=None, seed=0))]
    fn spawn_agents(
        &mut self,
        py: Python<'_>,
        start: &str,
        count: Option<usize>,
        horizon: Option<usize>,
        seed: u64,
    ) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.spawn_agents(start, count, horizon, seed).py()?)
    }

    fn occupancy(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.occupancy().py()?)
    }

    fn set_cursor(&mut self, py: Python<'_>, t: usize) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.set_cursor(t).py()?)
    }

    #[pyo3(signature = (steps=None, converge=false, tolerance=None, max_iter=None))]
    fn step_layout(
        &mut self,
        py: Python<'_>,
        steps: Option<usize>,
        converge: bool,
        tolerance: Option<f64>,
        max_iter: Option<usize>,
    ) -> PyResult<Py<PyAny>> {
        let request = LayoutStepRequest {
            steps,
            converge,
            tolerance,
            max_iter,
        };
        to_py(py, &self.inner.step_layout(&request).py()?)
    }
}

#[pymodule]
fn patrolscope(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PatrolscopeError", m.py().get_type::<PatrolscopeError>())?;
    m.add_class::<Strategy>()?;
    m.add_class::<AgentEnsemble>()?;
    m.add_class::<Session>()?;
    m.add_function(wrap_pyfunction!(stationary_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(location_mass, m)?)?;
    m.add_function(wrap_pyfunction!(edge_flow, m)?)?;
    m.add_function(wrap_pyfunction!(visit_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(expected_hitting_time, m)?)?;
    m.add_function(wrap_pyfunction!(direct_path_probability, m)?)?;
    m.add_function(wrap_pyfunction!(loop_report, m)?)?;
    m.add_function(wrap_pyfunction!(loop_break_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(compute_layout, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_json, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
