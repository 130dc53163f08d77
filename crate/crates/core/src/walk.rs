//! Seeded non-backtracking random walks.
//!
//! A walker moves from its current vertex to a neighbor other than the one it
//! just came from, chosen with probability proportional to edge weight, and
//! accumulates the resistance `1/w` of every edge it crosses. It stops on the
//! first of:
//!
//! * the cumulative distortion `w_pq · R` exceeds the budget `K`
//!   (checked after each edge, the offending edge included),
//! * the target is reached,
//! * the step cap `T` is hit,
//! * no neighbor other than the previous vertex exists.
//!
//! The accumulated resistance of any walk that reaches `q` upper-bounds the
//! effective resistance between `p` and `q`: the walk's loop-erased path is a
//! simple `p`–`q` path and series resistance dominates the parallel network.
//!
//! Every walker owns an RNG seeded from `(global_seed, update_id,
//! walker_index)`, so verdicts do not depend on scheduling. They do depend on
//! adjacency order, which deletions permute; determinism therefore holds for
//! a fixed construction history of the graph.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{DynamicGraph, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("walk start {0} has no neighbors")]
    IsolatedStart(VertexId),

    #[error("walk endpoints must differ (got {0} twice)")]
    SameEndpoints(VertexId),

    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: VertexId, n: usize },

    #[error("invalid walk configuration: {0}")]
    InvalidConfig(String),
}

/// Walker parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    /// Distortion budget `K`.
    pub distortion_threshold: f64,
    /// Step cap `T` per walker.
    pub step_cap: usize,
    /// Walkers `s` per query.
    pub walker_count: usize,
    pub global_seed: u64,
}

pub const DEFAULT_STEP_CAP: usize = 100;
pub const DEFAULT_WALKER_COUNT: usize = 16;

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            distortion_threshold: 1.0,
            step_cap: DEFAULT_STEP_CAP,
            walker_count: DEFAULT_WALKER_COUNT,
            global_seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn new(
        distortion_threshold: f64,
        step_cap: usize,
        walker_count: usize,
        global_seed: u64,
    ) -> Result<Self, WalkError> {
        let cfg = Self {
            distortion_threshold,
            step_cap,
            walker_count,
            global_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), WalkError> {
        if !(self.distortion_threshold > 0.0) {
            return Err(WalkError::InvalidConfig(format!(
                "distortion threshold must be positive, got {}",
                self.distortion_threshold
            )));
        }
        if self.step_cap == 0 {
            return Err(WalkError::InvalidConfig("step cap must be at least 1".into()));
        }
        if self.walker_count == 0 {
            return Err(WalkError::InvalidConfig("walker count must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_threshold(self, distortion_threshold: f64) -> Self {
        Self {
            distortion_threshold,
            ..self
        }
    }

    /// Upper bound on steps taken by one query.
    pub fn max_steps(&self) -> usize {
        self.walker_count * self.step_cap
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ReachedTarget,
    BudgetExceeded,
    StepCap,
    DeadEnd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkTrace {
    /// Visited vertices, starting at the walk's origin.
    pub path: Vec<VertexId>,
    /// Sum of `1/w` over traversed edges.
    pub accumulated_resistance: f64,
    pub terminal: Termination,
}

impl WalkTrace {
    pub fn steps(&self) -> usize {
        self.path.len() - 1
    }

    pub fn reached(&self) -> bool {
        self.terminal == Termination::ReachedTarget
    }
}

/// Outcome of a reachability query.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReachVerdict {
    /// Minimum accumulated resistance over walkers that reached the target.
    pub best_estimate: Option<f64>,
    /// Steps taken by all walkers together.
    pub steps_used: usize,
}

impl ReachVerdict {
    #[inline]
    pub fn reached(&self) -> bool {
        self.best_estimate.is_some()
    }
}

/// A loop-erased path recovered between two vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredPath {
    pub vertices: Vec<VertexId>,
    /// Resistance of the loop-erased path.
    pub resistance: f64,
    /// Walker whose trace produced this path.
    pub walker_index: usize,
}

impl RecoveredPath {
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices.windows(2).map(|e| (e[0], e[1]))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathSearch {
    pub path: Option<RecoveredPath>,
    pub steps_used: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for walker `walker_index` of update `update_id`.
pub fn walker_seed(global_seed: u64, update_id: u64, walker_index: u64) -> u64 {
    let h = splitmix64(global_seed);
    let h = splitmix64(h ^ update_id);
    splitmix64(h ^ walker_index)
}

pub fn walker_rng(global_seed: u64, update_id: u64, walker_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(walker_seed(global_seed, update_id, walker_index))
}

fn check_endpoints(g: &DynamicGraph, p: VertexId, q: VertexId) -> Result<(), WalkError> {
    let n = g.vertex_count();
    for vertex in [p, q] {
        if vertex >= n {
            return Err(WalkError::VertexOutOfRange { vertex, n });
        }
    }
    if p == q {
        return Err(WalkError::SameEndpoints(p));
    }
    if g.degree(p) == 0 {
        return Err(WalkError::IsolatedStart(p));
    }
    Ok(())
}

/// Weighted draw among the neighbors of `cur` other than `prev`, by inverting
/// the cumulative weight over the adjacency array.
fn next_vertex<R: Rng>(
    g: &DynamicGraph,
    cur: VertexId,
    prev: Option<VertexId>,
    rng: &mut R,
) -> Option<(VertexId, f64)> {
    let nbrs = g.neighbors(cur);
    let allowed = |v: VertexId| Some(v) != prev;
    let total: f64 = nbrs.iter().filter(|&&(v, _)| allowed(v)).map(|&(_, w)| w).sum();
    if total <= 0.0 {
        return None;
    }
    let mut r = rng.random::<f64>() * total;
    let mut last = None;
    for &(v, w) in nbrs.iter().filter(|&&(v, _)| allowed(v)) {
        if r < w {
            return Some((v, w));
        }
        r -= w;
        last = Some((v, w));
    }
    last
}

/// One non-backtracking walk from `p` toward `q` on `g`.
pub fn single_walk<R: Rng>(
    g: &DynamicGraph,
    p: VertexId,
    q: VertexId,
    edge_weight: f64,
    budget: f64,
    step_cap: usize,
    rng: &mut R,
) -> Result<WalkTrace, WalkError> {
    check_endpoints(g, p, q)?;
    let mut path = vec![p];
    let mut resistance = 0.0;
    let mut prev = None;
    let mut cur = p;
    let terminal = loop {
        if path.len() > step_cap {
            break Termination::StepCap;
        }
        let Some((next, w)) = next_vertex(g, cur, prev, rng) else {
            break Termination::DeadEnd;
        };
        resistance += 1.0 / w;
        path.push(next);
        prev = Some(cur);
        cur = next;
        if edge_weight * resistance > budget {
            break Termination::BudgetExceeded;
        }
        if cur == q {
            break Termination::ReachedTarget;
        }
    };
    Ok(WalkTrace {
        path,
        accumulated_resistance: resistance,
        terminal,
    })
}

fn run_walkers(
    g: &DynamicGraph,
    p: VertexId,
    q: VertexId,
    edge_weight: f64,
    cfg: &WalkConfig,
    update_id: u64,
) -> Result<Vec<WalkTrace>, WalkError> {
    (0..cfg.walker_count)
        .map(|i| {
            let mut rng = walker_rng(cfg.global_seed, update_id, i as u64);
            single_walk(
                g,
                p,
                q,
                edge_weight,
                cfg.distortion_threshold,
                cfg.step_cap,
                &mut rng,
            )
        })
        .collect()
}

/// Launches `s` walkers from `p` and reports whether any reached `q` within
/// the distortion budget, together with the smallest accumulated resistance
/// among those that did.
pub fn nbrw_reach(
    g: &DynamicGraph,
    p: VertexId,
    q: VertexId,
    edge_weight: f64,
    cfg: &WalkConfig,
    update_id: u64,
) -> Result<ReachVerdict, WalkError> {
    let traces = run_walkers(g, p, q, edge_weight, cfg, update_id)?;
    let steps_used = traces.iter().map(WalkTrace::steps).sum();
    let best_estimate = traces
        .iter()
        .filter(|t| t.reached())
        .map(|t| t.accumulated_resistance)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.min(r))));
    Ok(ReachVerdict {
        best_estimate,
        steps_used,
    })
}

/// Chronological loop erasure: whenever the walk revisits a vertex, the loop
/// since its first visit is cut out.
pub fn loop_erase(path: &[VertexId]) -> Vec<VertexId> {
    let mut out: Vec<VertexId> = Vec::with_capacity(path.len());
    for &v in path {
        if let Some(i) = out.iter().position(|&x| x == v) {
            out.truncate(i + 1);
        } else {
            out.push(v);
        }
    }
    out
}

/// Minimum-resistance `p`–`q` path among `s` walkers on `g`.
///
/// `cfg.distortion_threshold` is a raw resistance budget here (the walk's
/// edge weight is taken as 1); pass `f64::INFINITY` to rely on the step cap
/// alone. The selected trace is loop-erased and its resistance recomputed.
pub fn nbrw_min_path(
    g: &DynamicGraph,
    p: VertexId,
    q: VertexId,
    cfg: &WalkConfig,
    update_id: u64,
) -> Result<PathSearch, WalkError> {
    let traces = run_walkers(g, p, q, 1.0, cfg, update_id)?;
    let steps_used = traces.iter().map(WalkTrace::steps).sum();
    let best = traces
        .iter()
        .enumerate()
        .filter(|(_, t)| t.reached())
        // strict < keeps the lowest walker index on ties
        .fold(None, |acc: Option<(usize, &WalkTrace)>, (i, t)| match acc {
            Some((_, b)) if b.accumulated_resistance <= t.accumulated_resistance => acc,
            _ => Some((i, t)),
        });
    let path = best.map(|(walker_index, trace)| {
        let vertices = loop_erase(&trace.path);
        let resistance = vertices
            .windows(2)
            .map(|e| 1.0 / g.edge_weight(e[0], e[1]).expect("walk follows edges"))
            .sum();
        RecoveredPath {
            vertices,
            resistance,
            walker_index,
        }
    });
    Ok(PathSearch { path, steps_used })
}

/// A walk request inside a batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WalkQuery {
    /// Reachability filter for an inserted edge of weight `weight`.
    Reach {
        p: VertexId,
        q: VertexId,
        weight: f64,
        update_id: u64,
    },
    /// Path recovery with a raw resistance budget.
    MinPath {
        p: VertexId,
        q: VertexId,
        budget: f64,
        update_id: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum WalkOutcome {
    Reach(ReachVerdict),
    MinPath(PathSearch),
}

impl WalkOutcome {
    pub fn steps_used(&self) -> usize {
        match self {
            WalkOutcome::Reach(v) => v.steps_used,
            WalkOutcome::MinPath(s) => s.steps_used,
        }
    }
}

/// Runs a batch of queries against one read-only snapshot, in parallel on the
/// current rayon pool. Results come back in query order and equal what
/// sequential calls with the same update ids would return.
pub fn run_batch(
    g: &DynamicGraph,
    queries: &[WalkQuery],
    cfg: &WalkConfig,
) -> Vec<Result<WalkOutcome, WalkError>> {
    queries
        .par_iter()
        .map(|query| match *query {
            WalkQuery::Reach {
                p,
                q,
                weight,
                update_id,
            } => nbrw_reach(g, p, q, weight, cfg, update_id).map(WalkOutcome::Reach),
            WalkQuery::MinPath {
                p,
                q,
                budget,
                update_id,
            } => {
                let cfg = cfg.with_threshold(budget);
                nbrw_min_path(g, p, q, &cfg, update_id).map(WalkOutcome::MinPath)
            }
        })
        .collect()
}
