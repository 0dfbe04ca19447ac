//! Seeded ensembles of simulated patrols.
//!
//! Each agent draws from its own ChaCha8 stream: the key is the little-endian ensemble seed
//! padded with zeros, the stream number is the agent index. A uniform draw is the top 53 bits
//! of the next 64-bit output scaled by 2^-53, and the next node is the first outgoing edge (in
//! file order) whose cumulative probability exceeds the draw. Paths therefore depend only on
//! `(strategy, start, seed, agent index)`, never on platform or thread scheduling.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::strategy::Strategy;

pub const DEFAULT_AGENTS: usize = 400;
pub const DEFAULT_HORIZON: usize = crate::analysis::DEFAULT_HORIZON;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentEnsemble {
    start: String,
    count: usize,
    horizon: usize,
    seed: u64,
    node_ids: Vec<String>,
    /// `paths[a][t]` is agent `a`'s node index at step `t`.
    paths: Vec<Vec<u32>>,
    cursor: usize,
}

/// Occupancy at one step, node ids alongside counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Occupancy {
    pub t: usize,
    pub horizon: usize,
    pub count: usize,
    pub order: Vec<String>,
    pub counts: Vec<usize>,
}

fn agent_rng(seed: u64, agent: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(agent as u64);
    rng
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn spawn_agents(
    strategy: &Strategy,
    start: &str,
    count: usize,
    horizon: usize,
    seed: u64,
) -> Result<AgentEnsemble> {
    let s = strategy.require_node(start)?;
    if count == 0 || horizon == 0 {
        return Err(Error::InvalidArgument(
            "agent count and horizon must be at least 1".into(),
        ));
    }
    // cumulative (target, upper bound) per node
    let table: Vec<Vec<(u32, f64)>> = (0..strategy.node_count())
        .map(|node| {
            let mut acc = 0.0;
            strategy
                .outgoing(node)
                .iter()
                .map(|&e| {
                    let edge = strategy.edges()[e];
                    acc += edge.p;
                    (edge.to as u32, acc)
                })
                .collect()
        })
        .collect();

    let paths = (0..count)
        .into_par_iter()
        .map(|agent| {
            let mut rng = agent_rng(seed, agent);
            let mut path = Vec::with_capacity(horizon + 1);
            let mut at = s as u32;
            path.push(at);
            for _ in 0..horizon {
                let u = uniform(&mut rng);
                let row = &table[at as usize];
                at = row
                    .iter()
                    .find(|&&(_, upper)| u < upper)
                    .or(row.last())
                    .expect("every node has an outgoing edge")
                    .0;
                path.push(at);
            }
            path
        })
        .collect();

    Ok(AgentEnsemble {
        start: start.to_owned(),
        count,
        horizon,
        seed,
        node_ids: strategy.node_ids(),
        paths,
        cursor: 0,
    })
}

impl AgentEnsemble {
    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn set_cursor(&mut self, t: usize) -> Result<()> {
        self.check(t)?;
        self.cursor = t;
        Ok(())
    }

    fn check(&self, t: usize) -> Result<()> {
        if t > self.horizon {
            Err(Error::CursorOutOfRange {
                t,
                horizon: self.horizon,
            })
        } else {
            Ok(())
        }
    }

    /// Number of agents at each node after `t` steps.
    pub fn occupancy(&self, t: usize) -> Result<Vec<usize>> {
        self.check(t)?;
        let mut counts = vec![0; self.node_ids.len()];
        for path in &self.paths {
            counts[path[t] as usize] += 1;
        }
        Ok(counts)
    }

    pub fn occupancy_at_cursor(&self) -> Occupancy {
        Occupancy {
            t: self.cursor,
            horizon: self.horizon,
            count: self.count,
            order: self.node_ids.clone(),
            counts: self.occupancy(self.cursor).expect("cursor is always in range"),
        }
    }

    /// Node indices visited by `agent`, `horizon + 1` entries starting at the start node.
    pub fn path(&self, agent: usize) -> Option<&[u32]> {
        self.paths.get(agent).map(Vec::as_slice)
    }

    /// Node ids visited by agent 0, for single-patrol replay.
    pub fn single_agent(&self) -> Vec<String> {
        self.paths[0]
            .iter()
            .map(|&n| self.node_ids[n as usize].clone())
            .collect()
    }
}
