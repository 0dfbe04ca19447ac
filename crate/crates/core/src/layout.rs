//! Force-directed placement of locations and memory nodes.
//!
//! Locations move under three forces: linear attraction between locations sharing an edge,
//! inverse-distance repulsion between every pair, and gravity towards the canvas centre. Memory
//! nodes only interact with siblings in the same location, are pulled towards their parent's
//! centre, and in open locations feel an axial force that rotates them towards their edges.
//! Closed-location nodes are kept exactly on the petal circle.
//!
//! Memory-node dynamics are much stiffer than location dynamics (small radii, many siblings),
//! so each location's members are integrated with `s` equal sub-steps per location step, where
//! `s` is chosen from a bound on the local stiffness. Locations always use the fixed step.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::aggregation::ViewGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn polar(radius: f64, angle: f64) -> Self {
        Vec2::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Unit vector, or `fallback` when the vector is (numerically) zero.
    fn unit_or(self, fallback: Vec2) -> Vec2 {
        let n = self.norm();
        if n > 1e-12 {
            self * (1.0 / n)
        } else {
            fallback
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        *self = *self + o;
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        *self = *self - o;
    }
}

/// Deterministic direction for coincident points.
fn tie_break(a: usize, b: usize) -> Vec2 {
    // golden angle spreads successive indices around the circle
    Vec2::polar(1.0, 2.399_963_229_728_653 * (a * 31 + b) as f64)
}

/// Distances below this are treated as this in the repulsion law.
const MIN_DISTANCE: f64 = 1e-3;
const MAX_SUBSTEPS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    pub k_attract: f64,
    pub k_repulse: f64,
    pub k_gravity: f64,
    pub k_axial: f64,
    pub damping: f64,
    pub dt: f64,
    pub r_closed: f64,
    pub r_open: f64,
    pub r_petal: f64,
    /// Radius of a memory node, used as its gravity weight.
    pub r_node: f64,
    /// Radius of the disc around the canvas centre used for initial placement.
    pub spread: f64,
    pub canvas_center: Vec2,
    pub seed: u64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            k_attract: 0.05,
            k_repulse: 500.0,
            k_gravity: 0.01,
            k_axial: 0.5,
            damping: 0.85,
            dt: 1.0,
            r_closed: 20.0,
            r_open: 60.0,
            r_petal: 12.0,
            r_node: 4.0,
            spread: 250.0,
            canvas_center: Vec2::new(500.0, 500.0),
            seed: 0,
        }
    }
}

impl LayoutParams {
    pub fn validate(&self) -> Result<()> {
        let constants = [
            ("k_attract", self.k_attract),
            ("k_repulse", self.k_repulse),
            ("k_gravity", self.k_gravity),
            ("k_axial", self.k_axial),
            ("r_node", self.r_node),
            ("spread", self.spread),
        ];
        for (name, value) in constants {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidArgument(format!("{name} must be finite and >= 0")));
            }
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidArgument("damping must lie in (0, 1)".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument("dt must be positive".into()));
        }
        if !(self.r_petal > 0.0 && self.r_petal < self.r_closed && self.r_closed < self.r_open)
            || !self.r_open.is_finite()
        {
            return Err(Error::InvalidArgument(
                "radii must satisfy 0 < r_petal < r_closed < r_open".into(),
            ));
        }
        if !(self.canvas_center.x.is_finite() && self.canvas_center.y.is_finite()) {
            return Err(Error::InvalidArgument("canvas centre must be finite".into()));
        }
        Ok(())
    }

    fn location_radius(&self, open: bool) -> f64 {
        if open {
            self.r_open
        } else {
            self.r_closed
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Body {
    pub position: Vec2,
    /// For memory nodes, relative to the parent location.
    pub velocity: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutState {
    pub locations: Vec<Body>,
    pub nodes: Vec<Body>,
    pub open: Vec<bool>,
    pub iteration: usize,
}

/// Seeded initial placement: location centres uniformly in a disc of radius `spread`, memory
/// nodes evenly spaced around their parent (on the petal circle when closed, at half the open
/// radius when open).
pub fn init_layout(view: &ViewGraph, params: &LayoutParams) -> LayoutState {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&params.seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;

    let locations: Vec<Body> = view
        .members
        .iter()
        .map(|_| {
            let radius = params.spread * unit().sqrt();
            let angle = TAU * unit();
            Body {
                position: params.canvas_center + Vec2::polar(radius, angle),
                velocity: Vec2::ZERO,
            }
        })
        .collect();

    let mut nodes = vec![Body::default(); view.node_ids.len()];
    for (l, members) in view.members.iter().enumerate() {
        let radius = if view.open[l] {
            params.r_open * 0.5
        } else {
            params.r_petal
        };
        for (k, &n) in members.iter().enumerate() {
            let angle = TAU * k as f64 / members.len() as f64;
            nodes[n].position = locations[l].position + Vec2::polar(radius, angle);
        }
    }
    LayoutState {
        locations,
        nodes,
        open: view.open.clone(),
        iteration: 0,
    }
}

/// Undirected location-pair weights: the larger weight among view edges joining the two
/// locations in either direction.
fn location_pairs(view: &ViewGraph) -> Vec<(usize, usize, f64)> {
    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in &view.edges {
        let a = view.elements[e.from].location;
        let b = view.elements[e.to].location;
        if a == b {
            continue;
        }
        let w = pairs.entry((a.min(b), a.max(b))).or_insert(0.0);
        *w = w.max(e.weight);
    }
    pairs.into_iter().map(|((a, b), w)| (a, b, w)).collect()
}

fn location_forces(state: &LayoutState, view: &ViewGraph, params: &LayoutParams) -> Vec<Vec2> {
    let pos: Vec<Vec2> = state.locations.iter().map(|b| b.position).collect();
    let mut force = vec![Vec2::ZERO; pos.len()];

    for (a, b, w) in location_pairs(view) {
        // magnitude k·w·d along the separation
        let pull = (pos[b] - pos[a]) * (params.k_attract * w);
        force[a] += pull;
        force[b] -= pull;
    }
    for a in 0..pos.len() {
        for b in a + 1..pos.len() {
            let delta = pos[a] - pos[b];
            let d = delta.norm();
            let push = delta.unit_or(tie_break(a, b)) * (params.k_repulse / d.max(MIN_DISTANCE));
            force[a] += push;
            force[b] -= push;
        }
    }
    for (a, f) in force.iter_mut().enumerate() {
        let radius = params.location_radius(view.open[a]);
        *f += gravity(
            params.canvas_center - pos[a],
            radius,
            params.k_gravity,
            params.damping,
            params.dt,
        );
    }
    force
}

/// Pull of magnitude `k·radius` towards the target. Close to the target the pull becomes a
/// spring whose stiffness is capped at critical damping for the integrator (`damping`, `h`),
/// so elements settle without ringing around the target.
fn gravity(to_target: Vec2, radius: f64, k: f64, damping: f64, h: f64) -> Vec2 {
    let d = to_target.norm();
    if d <= 1e-12 || radius <= 0.0 || k <= 0.0 {
        return Vec2::ZERO;
    }
    let critical = (1.0 - damping.sqrt()).powi(2) / (damping * h * h);
    let magnitude = (k * radius).min(k.min(critical) * d);
    to_target * (magnitude / d)
}

/// Advances `state` by one step and returns the largest displacement of any location or node.
pub fn step_in_place(state: &mut LayoutState, view: &ViewGraph, params: &LayoutParams) -> f64 {
    let force = location_forces(state, view, params);
    let mut shift = vec![Vec2::ZERO; state.locations.len()];
    let mut max_displacement: f64 = 0.0;
    for ((body, f), s) in state.locations.iter_mut().zip(force).zip(shift.iter_mut()) {
        body.velocity = (body.velocity + f * params.dt) * params.damping;
        *s = body.velocity * params.dt;
        body.position += *s;
        max_displacement = max_displacement.max(s.norm());
    }
    state.open.clone_from(&view.open);

    let before: Vec<Vec2> = state.nodes.iter().map(|b| b.position).collect();
    for (l, members) in view.members.iter().enumerate() {
        for &n in members {
            state.nodes[n].position += shift[l];
        }
    }

    let node_location = node_locations(view);
    // where each node's edges are drawn to
    let anchors: Vec<Vec2> = (0..state.nodes.len())
        .map(|n| {
            let l = node_location[n];
            if view.open[l] {
                state.nodes[n].position
            } else {
                state.locations[l].position
            }
        })
        .collect();
    let mut counterparts: Vec<Vec<usize>> = vec![Vec::new(); state.nodes.len()];
    for &(a, b, _) in &view.node_edges {
        if node_location[a] != node_location[b] {
            counterparts[a].push(b);
            counterparts[b].push(a);
        }
    }

    for (l, members) in view.members.iter().enumerate() {
        step_members(state, l, members, view.open[l], &anchors, &counterparts, params);
    }
    for (n, old) in before.iter().enumerate() {
        max_displacement = max_displacement.max((state.nodes[n].position - *old).norm());
    }
    state.iteration += 1;
    max_displacement
}

fn node_locations(view: &ViewGraph) -> Vec<usize> {
    let mut out = vec![0; view.node_ids.len()];
    for (l, members) in view.members.iter().enumerate() {
        for &n in members {
            out[n] = l;
        }
    }
    out
}

fn step_members(
    state: &mut LayoutState,
    location: usize,
    members: &[usize],
    open: bool,
    anchors: &[Vec2],
    counterparts: &[Vec<usize>],
    params: &LayoutParams,
) {
    let center = state.locations[location].position;
    let axial = open && params.k_axial > 0.0;

    // Stiffness bound: repulsion gradient summed over siblings, axial torque per unit arc,
    // and the gravity spring.
    let mut stiffness: f64 = params.k_gravity;
    for &i in members {
        let pi = state.nodes[i].position;
        let mut k: f64 = members
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| {
                let d = (pi - state.nodes[j].position).norm().max(MIN_DISTANCE);
                2.0 * params.k_repulse / (d * d)
            })
            .sum();
        if axial {
            let r = (pi - center).norm().max(params.r_node);
            k += counterparts[i]
                .iter()
                .map(|&x| params.k_axial * (anchors[x] - center).norm() / r)
                .sum::<f64>();
        }
        stiffness = stiffness.max(params.k_gravity + k);
    }
    let substeps = ((stiffness * params.dt * params.dt / 2.0).sqrt().ceil() as usize)
        .clamp(1, MAX_SUBSTEPS);
    let h = params.dt / substeps as f64;
    let damping = params.damping.powf(1.0 / substeps as f64);

    for _ in 0..substeps {
        let forces: Vec<Vec2> = members
            .iter()
            .enumerate()
            .map(|(a, &i)| {
                let pi = state.nodes[i].position;
                let mut f = gravity(center - pi, params.r_node, params.k_gravity, damping, h);
                for (b, &j) in members.iter().enumerate() {
                    if a == b {
                        continue;
                    }
                    let delta = pi - state.nodes[j].position;
                    let d = delta.norm();
                    f += delta.unit_or(tie_break(a, b)) * (params.k_repulse / d.max(MIN_DISTANCE));
                }
                if axial {
                    let tangent = (pi - center).unit_or(tie_break(a, members.len())).perp();
                    for &x in &counterparts[i] {
                        let edge = anchors[x] - pi;
                        f += tangent * (params.k_axial * edge.dot(tangent));
                    }
                }
                f
            })
            .collect();
        for ((k, &i), f) in members.iter().enumerate().zip(forces) {
            let body = &mut state.nodes[i];
            body.velocity = (body.velocity + f * h) * damping;
            body.position += body.velocity * h;
            constrain(body, center, open, k, members.len(), params);
        }
    }
}

fn constrain(body: &mut Body, center: Vec2, open: bool, k: usize, count: usize, params: &LayoutParams) {
    let rel = body.position - center;
    let d = rel.norm();
    let fallback = Vec2::polar(1.0, TAU * k as f64 / count as f64);
    let radial = rel.unit_or(fallback);
    if !open {
        body.position = center + radial * params.r_petal;
        body.velocity -= radial * body.velocity.dot(radial);
    } else if d > params.r_open {
        body.position = center + radial * params.r_open;
        let outward = body.velocity.dot(radial);
        if outward > 0.0 {
            body.velocity -= radial * outward;
        }
    }
}

/// One integration step.
pub fn step_layout(state: &LayoutState, view: &ViewGraph, params: &LayoutParams) -> LayoutState {
    let mut next = state.clone();
    step_in_place(&mut next, view, params);
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Convergence {
    pub iterations: usize,
    pub converged: bool,
    pub max_displacement: f64,
}

/// Steps until the largest per-element displacement drops below `tolerance` or `max_iter`
/// steps have run.
pub fn run_until_converged(
    state: &LayoutState,
    view: &ViewGraph,
    params: &LayoutParams,
    tolerance: f64,
    max_iter: usize,
) -> Result<(LayoutState, Convergence)> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let mut current = state.clone();
    let mut report = Convergence {
        iterations: 0,
        converged: false,
        max_displacement: f64::INFINITY,
    };
    while report.iterations < max_iter {
        report.max_displacement = step_in_place(&mut current, view, params);
        report.iterations += 1;
        if report.max_displacement < tolerance {
            report.converged = true;
            break;
        }
    }
    Ok((current, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedLocation {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub open: bool,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedNode {
    pub id: String,
    pub location: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutSnapshot {
    pub iteration: usize,
    pub locations: Vec<PlacedLocation>,
    pub nodes: Vec<PlacedNode>,
}

impl LayoutState {
    pub fn snapshot(&self, view: &ViewGraph, params: &LayoutParams) -> LayoutSnapshot {
        let node_location = node_locations(view);
        LayoutSnapshot {
            iteration: self.iteration,
            locations: self
                .locations
                .iter()
                .enumerate()
                .map(|(l, b)| PlacedLocation {
                    id: view.location_ids[l].clone(),
                    x: b.position.x,
                    y: b.position.y,
                    open: self.open[l],
                    radius: params.location_radius(self.open[l]),
                })
                .collect(),
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(n, b)| PlacedNode {
                    id: view.node_ids[n].clone(),
                    location: view.location_ids[node_location[n]].clone(),
                    x: b.position.x,
                    y: b.position.y,
                })
                .collect(),
        }
    }

    /// Position an element of `view` is drawn at.
    pub fn element_position(&self, view: &ViewGraph, element: usize) -> Vec2 {
        let e = &view.elements[element];
        match e.kind {
            crate::aggregation::ElementKind::Location => self.locations[e.index].position,
            crate::aggregation::ElementKind::Node => self.nodes[e.index].position,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::{build_view, ViewState};
    use crate::fixtures;
    use crate::strategy::StrategyBuilder;

    fn closed_view(s: &crate::strategy::Strategy) -> ViewGraph {
        build_view(s, &ViewState::closed()).unwrap()
    }

    #[test]
    fn default_params_are_valid() {
        assert!(LayoutParams::default().validate().is_ok());
        let bad = LayoutParams {
            r_petal: 30.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = LayoutParams {
            damping: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = LayoutParams {
            k_repulse: f64::NAN,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn same_seed_same_positions() {
        let s = fixtures::airport();
        let view = closed_view(&s);
        let params = LayoutParams::default();
        let a = init_layout(&view, &params);
        assert_eq!(a, init_layout(&view, &params));
        let other = init_layout(&view, &LayoutParams { seed: 1, ..params.clone() });
        assert_ne!(a, other);
        for l in &a.locations {
            assert!((l.position - params.canvas_center).norm() <= params.spread);
        }
    }

    #[test]
    fn single_location_settles_at_center() {
        let s = StrategyBuilder::new("one")
            .location("L", "L")
            .node("a", "L")
            .edge("a", "a", 1.0)
            .build()
            .unwrap();
        let view = closed_view(&s);
        let params = LayoutParams { seed: 3, ..Default::default() };
        let state = init_layout(&view, &params);
        // near the centre the distance is about 1 / (1 - sqrt(damping)) ≈ 13 times the last
        // step, so converge on a step size well below the distance tolerance
        let (done, report) = run_until_converged(&state, &view, &params, 5e-5, 1000).unwrap();
        assert!(report.converged, "{report:?}");
        let off = (done.locations[0].position - params.canvas_center).norm();
        assert!(off < 1e-3, "{off} {report:?}");
    }

    #[test]
    fn petal_radius_is_preserved() {
        let s = fixtures::airport();
        let view = closed_view(&s);
        let params = LayoutParams::default();
        let mut state = init_layout(&view, &params);
        for _ in 0..200 {
            step_in_place(&mut state, &view, &params);
            for (l, members) in view.members.iter().enumerate() {
                for &n in members {
                    let d = (state.nodes[n].position - state.locations[l].position).norm();
                    assert!((d - params.r_petal).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn open_members_stay_inside() {
        let s = fixtures::airport();
        let view = build_view(&s, &ViewState::all_open(&s)).unwrap();
        let params = LayoutParams::default();
        let mut state = init_layout(&view, &params);
        for _ in 0..300 {
            step_in_place(&mut state, &view, &params);
            for (l, members) in view.members.iter().enumerate() {
                for &n in members {
                    let d = (state.nodes[n].position - state.locations[l].position).norm();
                    assert!(d <= params.r_open + 1e-9);
                }
            }
        }
    }

    #[test]
    fn locations_ignore_memory_nodes() {
        let s = fixtures::airport();
        let view = build_view(&s, &ViewState::all_open(&s)).unwrap();
        let params = LayoutParams::default();
        let state = init_layout(&view, &params);
        let mut moved = state.clone();
        for b in &mut moved.nodes {
            b.position += Vec2::new(7.0, -3.0);
        }
        let a = step_layout(&state, &view, &params);
        let b = step_layout(&moved, &view, &params);
        assert_eq!(a.locations, b.locations);
    }

    #[test]
    fn axial_step_turns_node_towards_its_edge() {
        // one open location with a single node, one neighbour location
        let s = StrategyBuilder::new("axial")
            .location("L", "L")
            .location("N", "N")
            .node("m", "L")
            .node("n", "N")
            .edge("m", "n", 1.0)
            .edge("n", "m", 1.0)
            .build()
            .unwrap();
        let mut view_state = ViewState::closed();
        view_state.toggle("L");
        let view = build_view(&s, &view_state).unwrap();
        let params = LayoutParams::default();
        for angle in [0.3_f64, 1.0, 2.0, -0.7, -2.5] {
            let mut state = init_layout(&view, &params);
            let center = params.canvas_center;
            state.locations[0].position = center;
            state.locations[1].position = center + Vec2::new(120.0, 0.0);
            state.nodes[0].position = center + Vec2::polar(params.r_open * 0.5, angle);
            let signed = |st: &LayoutState| {
                let node = st.nodes[0].position - st.locations[0].position;
                let edge = st.locations[1].position - st.locations[0].position;
                (node.perp().dot(edge)).atan2(node.dot(edge))
            };
            let before = signed(&state);
            let after = signed(&step_layout(&state, &view, &params));
            assert!(after.abs() < before.abs(), "angle {angle}: {before} -> {after}");
        }
    }

    #[test]
    fn two_linked_locations_reach_equilibrium_distance() {
        let s = fixtures::two_cycle();
        let view = closed_view(&s);
        let params = LayoutParams {
            k_gravity: 0.0,
            ..Default::default()
        };
        let mut state = init_layout(&view, &params);
        state.locations[0].position = params.canvas_center - Vec2::new(30.0, 0.0);
        state.locations[1].position = params.canvas_center + Vec2::new(30.0, 0.0);
        let (done, report) = run_until_converged(&state, &view, &params, 1e-6, 20_000).unwrap();
        assert!(report.converged);
        let d = (done.locations[0].position - done.locations[1].position).norm();
        let expected = (params.k_repulse / params.k_attract).sqrt();
        assert!((d / expected - 1.0).abs() < 0.01, "{d}");
    }

    #[test]
    fn disconnected_locations_do_not_overlap() {
        let mut b = StrategyBuilder::new("islands");
        for i in 0..5 {
            b = b
                .location(format!("L{i}"), "")
                .node(format!("n{i}"), format!("L{i}"))
                .edge(format!("n{i}"), format!("n{i}"), 1.0);
        }
        let s = b.build().unwrap();
        let view = closed_view(&s);
        let params = LayoutParams::default();
        let state = init_layout(&view, &params);
        let (done, report) = run_until_converged(&state, &view, &params, 0.05, 100_000).unwrap();
        assert!(report.converged, "{report:?}");
        for a in 0..5 {
            for b in a + 1..5 {
                let d = (done.locations[a].position - done.locations[b].position).norm();
                assert!(d >= 2.0 * params.r_closed);
            }
        }
    }

    #[test]
    fn determinism_over_many_steps() {
        let s = fixtures::office();
        let view = closed_view(&s);
        let params = LayoutParams { seed: 9, ..Default::default() };
        let run = || {
            let mut st = init_layout(&view, &params);
            for _ in 0..250 {
                step_in_place(&mut st, &view, &params);
            }
            st
        };
        assert_eq!(run(), run());
    }
}
