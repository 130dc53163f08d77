//! Maintains a sparsifier `H ⊆ G` under a stream of edge insertions and
//! deletions.
//!
//! An inserted edge `(u, v, w)` always enters `G`. It enters `H` only if
//! walkers on `H` fail to connect `u` to `v` within the distortion budget:
//! if they do connect, `H` already carries a low-resistance route and the new
//! edge adds little. A deleted edge that was in `H` is replaced by the
//! cheapest walk-recovered `u`–`v` path in the updated `G`; if no walker
//! arrives, each endpoint left without `H` edges receives its heaviest `G`
//! edge.

use std::time::Instant;

use log::debug;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{DynamicGraph, GraphError, VertexId};
use crate::io::IoError;
use crate::laplacian::SparseLaplacian;
use crate::spectral::{
    condition_number, ConditionMethod, SpectralError, DEFAULT_DENSE_CAP, DEFAULT_LANCZOS_TOLERANCE,
};
use crate::stream::{EdgeEvent, EventKind, UpdateStream};
use crate::walk::{
    nbrw_min_path, nbrw_reach, run_batch, PathSearch, ReachVerdict, RecoveredPath, WalkConfig,
    WalkError, WalkOutcome, WalkQuery,
};

pub const DEFAULT_RHO: f64 = 0.1;
pub const K_MIN: f64 = 1.0;
pub const K_MAX: f64 = 1e6;

#[derive(Debug, Error)]
pub enum SparsifyError {
    #[error("graph is disconnected ({0} components)")]
    Disconnected(usize),

    #[error("sparsifier has {h} vertices but the graph has {g}")]
    VertexCountMismatch { g: usize, h: usize },

    #[error("sparsifier edge ({u}, {v}) is not in the graph")]
    ForeignEdge { u: VertexId, v: VertexId },

    #[error("sparsifier edge ({u}, {v}) has weight {h_weight}, graph has {g_weight}")]
    WeightMismatch {
        u: VertexId,
        v: VertexId,
        g_weight: f64,
        h_weight: f64,
    },

    #[error("event {position}: {source}")]
    Event {
        position: usize,
        source: Box<SparsifyError>,
    },

    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Graph(#[from] GraphError),

    #[error(transparent)]
    Walk(#[from] WalkError),

    #[error(transparent)]
    Spectral(#[from] SpectralError),

    #[error(transparent)]
    Io(#[from] IoError),
}

/// What happens to inserted edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertionPolicy {
    /// Walk-based filter.
    Filter,
    /// Every insertion enters `H` (no-filter baseline).
    KeepAll,
    /// No insertion enters `H`; deletions are still processed.
    Freeze,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateMode {
    /// Each event sees every earlier mutation.
    Immediate,
    /// Walks in a batch see the batch-start state; mutations commit at the
    /// end of the batch.
    Batched,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsifierConfig {
    pub walk: WalkConfig,
    /// Resistance budget of recovery walkers; infinite leaves only the step
    /// cap.
    pub recovery_budget: f64,
    pub policy: InsertionPolicy,
    pub mode: UpdateMode,
}

impl Default for SparsifierConfig {
    fn default() -> Self {
        Self {
            walk: WalkConfig::default(),
            recovery_budget: f64::INFINITY,
            policy: InsertionPolicy::Filter,
            mode: UpdateMode::Immediate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertionDecision {
    Kept,
    Pruned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsertionOutcome {
    pub decision: InsertionDecision,
    /// Weight the filter saw (the pair's total `G` weight after coalescing).
    pub filter_weight: f64,
    /// Present when walkers ran.
    pub verdict: Option<ReachVerdict>,
}

impl InsertionOutcome {
    pub fn steps_used(&self) -> usize {
        self.verdict.as_ref().map_or(0, |v| v.steps_used)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeletionKind {
    /// The edge was not in `H`.
    GOnly,
    /// A recovery path was found; `k` of its edges were new to `H`.
    PathRecovered(usize),
    /// No path found; `k` endpoint edges were added.
    LocalFallback(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeletionOutcome {
    pub kind: DeletionKind,
    pub removed_weight: f64,
    pub path: Option<RecoveredPath>,
    pub steps_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventOutcome {
    Insertion(InsertionOutcome),
    Deletion(DeletionOutcome),
}

impl EventOutcome {
    pub fn steps_used(&self) -> usize {
        match self {
            EventOutcome::Insertion(o) => o.steps_used(),
            EventOutcome::Deletion(o) => o.steps_used,
        }
    }
}

/// One processed event, for callers that log or audit decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub position: usize,
    pub update_id: u64,
    pub event: EdgeEvent,
    pub outcome: EventOutcome,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BatchReport {
    pub index: usize,
    pub insertions: usize,
    pub kept: usize,
    pub pruned: usize,
    pub deletions: usize,
    pub deletions_in_h: usize,
    pub paths_recovered: usize,
    pub edges_recovered: usize,
    pub fallbacks: usize,
    pub fallback_edges: usize,
    pub walker_steps: usize,
    /// Largest walker-step total of a single event.
    pub max_event_steps: usize,
    pub wall_seconds: f64,
    pub density_g: f64,
    pub density_h: f64,
}

impl BatchReport {
    fn record(&mut self, outcome: &EventOutcome) {
        let steps = outcome.steps_used();
        self.walker_steps += steps;
        self.max_event_steps = self.max_event_steps.max(steps);
        match outcome {
            EventOutcome::Insertion(o) => {
                self.insertions += 1;
                match o.decision {
                    InsertionDecision::Kept => self.kept += 1,
                    InsertionDecision::Pruned => self.pruned += 1,
                }
            }
            EventOutcome::Deletion(o) => {
                self.deletions += 1;
                match o.kind {
                    DeletionKind::GOnly => {}
                    DeletionKind::PathRecovered(k) => {
                        self.deletions_in_h += 1;
                        self.paths_recovered += 1;
                        self.edges_recovered += k;
                    }
                    DeletionKind::LocalFallback(k) => {
                        self.deletions_in_h += 1;
                        self.fallbacks += 1;
                        self.fallback_edges += k;
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct UpdateReport {
    pub batches: Vec<BatchReport>,
    pub density_g: f64,
    pub density_h: f64,
}

impl UpdateReport {
    pub fn total(&self) -> BatchReport {
        let mut t = BatchReport {
            index: self.batches.len(),
            density_g: self.density_g,
            density_h: self.density_h,
            ..Default::default()
        };
        for b in &self.batches {
            t.insertions += b.insertions;
            t.kept += b.kept;
            t.pruned += b.pruned;
            t.deletions += b.deletions;
            t.deletions_in_h += b.deletions_in_h;
            t.paths_recovered += b.paths_recovered;
            t.edges_recovered += b.edges_recovered;
            t.fallbacks += b.fallbacks;
            t.fallback_edges += b.fallback_edges;
            t.walker_steps += b.walker_steps;
            t.max_event_steps = t.max_event_steps.max(b.max_event_steps);
            t.wall_seconds += b.wall_seconds;
        }
        t
    }
}

/// The `(G, H)` pair and the update counter that seeds walkers.
#[derive(Debug, Clone)]
pub struct SparsifierState {
    g: DynamicGraph,
    h: DynamicGraph,
    cfg: SparsifierConfig,
    update_counter: u64,
}

impl SparsifierState {
    /// Validates `H ⊆ G` with equal weights and equal vertex counts.
    pub fn new(g: DynamicGraph, h: DynamicGraph, cfg: SparsifierConfig) -> Result<Self, SparsifyError> {
        cfg.walk.validate()?;
        check_subgraph(&g, &h)?;
        Ok(Self {
            g,
            h,
            cfg,
            update_counter: 0,
        })
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.g
    }

    pub fn sparsifier(&self) -> &DynamicGraph {
        &self.h
    }

    pub fn config(&self) -> &SparsifierConfig {
        &self.cfg
    }

    pub fn set_config(&mut self, cfg: SparsifierConfig) -> Result<(), SparsifyError> {
        cfg.walk.validate()?;
        self.cfg = cfg;
        Ok(())
    }

    pub fn update_counter(&self) -> u64 {
        self.update_counter
    }

    pub fn into_parts(self) -> (DynamicGraph, DynamicGraph) {
        (self.g, self.h)
    }

    /// Full scan of the subgraph invariant.
    pub fn check_invariants(&self) -> Result<(), SparsifyError> {
        check_subgraph(&self.g, &self.h)
    }

    fn check_event(&self, e: &EdgeEvent) -> Result<(), SparsifyError> {
        e.validate(self.g.vertex_count())
            .map_err(SparsifyError::InvalidEvent)
    }

    /// Processes one insertion against the live state.
    pub fn apply_insertion(
        &mut self,
        u: VertexId,
        v: VertexId,
        w: f64,
    ) -> Result<InsertionOutcome, SparsifyError> {
        self.check_event(&EdgeEvent::insert(u, v, w, 0))?;
        let update_id = self.next_update_id();
        self.g.insert_edge(u, v, w)?;
        let total = self.g.edge_weight(u, v).expect("just inserted");
        let verdict = if self.walk_needed(&self.h, u, v) {
            reach_or_isolated(nbrw_reach(&self.h, u, v, total, &self.cfg.walk, update_id))?
        } else {
            None
        };
        Ok(self.commit_insertion(u, v, verdict))
    }

    /// Processes one deletion against the live state.
    pub fn apply_deletion(&mut self, u: VertexId, v: VertexId) -> Result<DeletionOutcome, SparsifyError> {
        self.check_event(&EdgeEvent::delete(u, v, 0))?;
        let update_id = self.next_update_id();
        let removed_weight = self.g.delete_edge(u, v)?;
        if !self.h.has_edge(u, v) {
            return Ok(DeletionOutcome {
                kind: DeletionKind::GOnly,
                removed_weight,
                path: None,
                steps_used: 0,
            });
        }
        let search = self.recovery_search(&self.g, u, v, update_id)?;
        Ok(self.commit_h_deletion(u, v, removed_weight, search))
    }

    fn next_update_id(&mut self) -> u64 {
        let id = self.update_counter;
        self.update_counter += 1;
        id
    }

    fn walk_needed(&self, h: &DynamicGraph, u: VertexId, v: VertexId) -> bool {
        self.cfg.policy == InsertionPolicy::Filter && !h.has_edge(u, v)
    }

    fn recovery_cfg(&self) -> WalkConfig {
        self.cfg.walk.with_threshold(self.cfg.recovery_budget)
    }

    fn recovery_search(
        &self,
        g: &DynamicGraph,
        u: VertexId,
        v: VertexId,
        update_id: u64,
    ) -> Result<Option<PathSearch>, SparsifyError> {
        if g.degree(u) == 0 {
            return Ok(None);
        }
        Ok(Some(nbrw_min_path(g, u, v, &self.recovery_cfg(), update_id)?))
    }

    /// Applies the `H` side of an insertion whose `G` side is done. `verdict`
    /// is the filter's result, `None` when no walk ran.
    fn commit_insertion(&mut self, u: VertexId, v: VertexId, verdict: Option<ReachVerdict>) -> InsertionOutcome {
        let total = self.g.edge_weight(u, v).expect("inserted into G");
        let decision = if self.h.has_edge(u, v) {
            // coalesced onto a retained pair: keep H's copy in sync with G
            self.h.set_edge_weight(u, v, total).expect("pair is in H");
            InsertionDecision::Kept
        } else {
            let keep = match self.cfg.policy {
                InsertionPolicy::KeepAll => true,
                InsertionPolicy::Freeze => false,
                InsertionPolicy::Filter => !verdict.as_ref().is_some_and(ReachVerdict::reached),
            };
            if keep {
                self.h.insert_edge(u, v, total).expect("valid pair");
                InsertionDecision::Kept
            } else {
                InsertionDecision::Pruned
            }
        };
        InsertionOutcome {
            decision,
            filter_weight: total,
            verdict,
        }
    }

    /// Removes `(u, v)` from `H` and repairs it with `search` (already run
    /// on a graph without the edge) or the local fallback.
    fn commit_h_deletion(
        &mut self,
        u: VertexId,
        v: VertexId,
        removed_weight: f64,
        search: Option<PathSearch>,
    ) -> DeletionOutcome {
        self.h.delete_edge(u, v).expect("pair is in H");
        let steps_used = search.as_ref().map_or(0, |s| s.steps_used);
        let path = search.and_then(|s| s.path);
        let kind = match &path {
            Some(p) => {
                let mut added = 0;
                for (a, b) in p.edges() {
                    if self.h.has_edge(a, b) {
                        continue;
                    }
                    if let Some(w) = self.g.edge_weight(a, b) {
                        self.h.insert_edge(a, b, w).expect("valid pair");
                        added += 1;
                    }
                }
                DeletionKind::PathRecovered(added)
            }
            None => DeletionKind::LocalFallback(self.local_fallback(u, v)),
        };
        DeletionOutcome {
            kind,
            removed_weight,
            path,
            steps_used,
        }
    }

    /// Gives every endpoint left without `H` edges its heaviest `G` edge
    /// (lowest neighbor id on ties).
    fn local_fallback(&mut self, u: VertexId, v: VertexId) -> usize {
        let mut added = 0;
        for x in [u, v] {
            if self.h.degree(x) > 0 {
                continue;
            }
            let best = self
                .g
                .neighbors(x)
                .iter()
                .filter(|&&(y, _)| !self.h.has_edge(x, y))
                .fold(None, |acc: Option<(VertexId, f64)>, &(y, w)| match acc {
                    Some((by, bw)) if bw > w || (bw == w && by < y) => acc,
                    _ => Some((y, w)),
                });
            if let Some((y, w)) = best {
                self.h.insert_edge(x, y, w).expect("valid pair");
                added += 1;
            }
        }
        added
    }

    /// Processes a whole stream, one batch at a time.
    pub fn replay_stream(&mut self, stream: &UpdateStream) -> Result<UpdateReport, SparsifyError> {
        self.replay_stream_with(stream, |_| {})
    }

    /// Like [`replay_stream`](Self::replay_stream), reporting every event.
    pub fn replay_stream_with<F>(&mut self, stream: &UpdateStream, mut on_event: F) -> Result<UpdateReport, SparsifyError>
    where
        F: FnMut(&EventRecord),
    {
        let mut report = UpdateReport {
            density_g: self.g.density(),
            density_h: self.h.density(),
            ..Default::default()
        };
        for (index, (start, events)) in stream.batches().into_iter().enumerate() {
            let b = self.replay_batch(index, start, events, &mut on_event)?;
            report.batches.push(b);
        }
        report.density_g = self.g.density();
        report.density_h = self.h.density();
        Ok(report)
    }

    /// Processes one batch; `first_position` is the stream position of its
    /// first event (used in error messages and records).
    pub fn replay_batch<F>(
        &mut self,
        index: usize,
        first_position: usize,
        events: &[EdgeEvent],
        on_event: &mut F,
    ) -> Result<BatchReport, SparsifyError>
    where
        F: FnMut(&EventRecord),
    {
        let started = Instant::now();
        let mut report = BatchReport {
            index,
            ..Default::default()
        };
        for (i, e) in events.iter().enumerate() {
            self.check_event(e).map_err(|err| at(first_position + i, err))?;
        }
        match self.cfg.mode {
            UpdateMode::Immediate => {
                for (i, e) in events.iter().enumerate() {
                    let update_id = self.update_counter;
                    let outcome = match e.kind {
                        EventKind::Insert { weight } => {
                            self.apply_insertion(e.u, e.v, weight).map(EventOutcome::Insertion)
                        }
                        EventKind::Delete => self.apply_deletion(e.u, e.v).map(EventOutcome::Deletion),
                    }
                    .map_err(|err| at(first_position + i, err))?;
                    report.record(&outcome);
                    on_event(&EventRecord {
                        position: first_position + i,
                        update_id,
                        event: *e,
                        outcome,
                    });
                }
            }
            UpdateMode::Batched => {
                self.replay_batched(first_position, events, &mut report, on_event)?;
            }
        }
        report.wall_seconds = started.elapsed().as_secs_f64();
        report.density_g = self.g.density();
        report.density_h = self.h.density();
        debug!(
            "batch {index}: kept {} pruned {} recovered {} fallback {}",
            report.kept, report.pruned, report.paths_recovered, report.fallbacks
        );
        Ok(report)
    }

    fn replay_batched<F>(
        &mut self,
        first_position: usize,
        events: &[EdgeEvent],
        report: &mut BatchReport,
        on_event: &mut F,
    ) -> Result<(), SparsifyError>
    where
        F: FnMut(&EventRecord),
    {
        let base_id = self.update_counter;
        let mut shadow = self.g.clone();
        for e in events {
            if e.kind == EventKind::Delete && shadow.has_edge(e.u, e.v) {
                shadow.delete_edge(e.u, e.v)?;
            }
        }

        // plan the walks against the batch-start snapshots
        let mut reach_queries = Vec::new();
        let mut reach_slot = vec![None; events.len()];
        let mut path_queries = Vec::new();
        let mut path_slot = vec![None; events.len()];
        let mut inserted_here: Vec<(VertexId, VertexId)> = Vec::new();
        for (i, e) in events.iter().enumerate() {
            let update_id = base_id + i as u64;
            let (u, v) = (e.u, e.v);
            match e.kind {
                EventKind::Insert { weight } => {
                    inserted_here.push((u.min(v), u.max(v)));
                    if self.walk_needed(&self.h, u, v) && self.h.degree(u) > 0 {
                        let base = self.g.edge_weight(u, v).unwrap_or(0.0);
                        reach_slot[i] = Some(reach_queries.len());
                        reach_queries.push(WalkQuery::Reach {
                            p: u,
                            q: v,
                            weight: base + weight,
                            update_id,
                        });
                    }
                }
                EventKind::Delete => {
                    let may_be_in_h = self.h.has_edge(u, v) || inserted_here.contains(&(u.min(v), u.max(v)));
                    if may_be_in_h && shadow.degree(u) > 0 {
                        path_slot[i] = Some(path_queries.len());
                        path_queries.push(WalkQuery::MinPath {
                            p: u,
                            q: v,
                            budget: self.cfg.recovery_budget,
                            update_id,
                        });
                    }
                }
            }
        }
        let mut reach_results = run_batch(&self.h, &reach_queries, &self.cfg.walk);
        let mut path_results = run_batch(&shadow, &path_queries, &self.cfg.walk);

        // commit in stream order
        for (i, e) in events.iter().enumerate() {
            let position = first_position + i;
            let update_id = base_id + i as u64;
            self.update_counter += 1;
            let outcome = match e.kind {
                EventKind::Insert { weight } => {
                    let verdict = match reach_slot[i] {
                        Some(k) => {
                            let r = std::mem::replace(&mut reach_results[k], Ok(WalkOutcome::Reach(ReachVerdict::default())));
                            reach_or_isolated(r.map(expect_reach)).map_err(|err| at(position, err))?
                        }
                        None => None,
                    };
                    self.g
                        .insert_edge(e.u, e.v, weight)
                        .map_err(|err| at(position, err.into()))?;
                    EventOutcome::Insertion(self.commit_insertion(e.u, e.v, verdict))
                }
                EventKind::Delete => {
                    let removed_weight = self
                        .g
                        .delete_edge(e.u, e.v)
                        .map_err(|err| at(position, err.into()))?;
                    if !self.h.has_edge(e.u, e.v) {
                        EventOutcome::Deletion(DeletionOutcome {
                            kind: DeletionKind::GOnly,
                            removed_weight,
                            path: None,
                            steps_used: 0,
                        })
                    } else {
                        let search = match path_slot[i] {
                            Some(k) => {
                                let r = std::mem::replace(
                                    &mut path_results[k],
                                    Ok(WalkOutcome::MinPath(PathSearch::default())),
                                );
                                Some(r.map(expect_path).map_err(|err| at(position, err.into()))?)
                            }
                            None => None,
                        };
                        EventOutcome::Deletion(self.commit_h_deletion(e.u, e.v, removed_weight, search))
                    }
                }
            };
            report.record(&outcome);
            on_event(&EventRecord {
                position,
                update_id,
                event: *e,
                outcome,
            });
        }
        Ok(())
    }
}

fn at(position: usize, err: SparsifyError) -> SparsifyError {
    SparsifyError::Event {
        position,
        source: Box::new(err),
    }
}

fn expect_reach(o: WalkOutcome) -> ReachVerdict {
    match o {
        WalkOutcome::Reach(v) => v,
        WalkOutcome::MinPath(_) => unreachable!("reach query"),
    }
}

fn expect_path(o: WalkOutcome) -> PathSearch {
    match o {
        WalkOutcome::MinPath(p) => p,
        WalkOutcome::Reach(_) => unreachable!("path query"),
    }
}

/// A walk that cannot start (the origin has no `H` edges) counts as not
/// reached.
fn reach_or_isolated(r: Result<ReachVerdict, WalkError>) -> Result<Option<ReachVerdict>, SparsifyError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(WalkError::IsolatedStart(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// `H ⊆ G` with identical weights and vertex counts.
pub fn check_subgraph(g: &DynamicGraph, h: &DynamicGraph) -> Result<(), SparsifyError> {
    if g.vertex_count() != h.vertex_count() {
        return Err(SparsifyError::VertexCountMismatch {
            g: g.vertex_count(),
            h: h.vertex_count(),
        });
    }
    for (u, v, hw) in h.sorted_edges() {
        match g.edge_weight(u, v) {
            None => return Err(SparsifyError::ForeignEdge { u, v }),
            Some(gw) if (gw - hw).abs() > 1e-12 * gw.max(hw) => {
                return Err(SparsifyError::WeightMismatch {
                    u,
                    v,
                    g_weight: gw,
                    h_weight: hw,
                })
            }
            Some(_) => {}
        }
    }
    Ok(())
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Tree-path resistances through a rooted spanning tree, by binary-lifting
/// lowest common ancestors.
struct TreeResistance {
    up: Vec<Vec<usize>>,
    depth: Vec<usize>,
    rdepth: Vec<f64>,
}

impl TreeResistance {
    fn new(tree: &DynamicGraph) -> Self {
        let n = tree.vertex_count();
        let levels = (usize::BITS - n.max(1).leading_zeros()) as usize + 1;
        let mut parent = vec![0; n];
        let mut depth = vec![0; n];
        let mut rdepth = vec![0.0; n];
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            parent[root] = root;
            stack.push(root);
            while let Some(x) = stack.pop() {
                for &(y, w) in tree.neighbors(x) {
                    if !seen[y] {
                        seen[y] = true;
                        parent[y] = x;
                        depth[y] = depth[x] + 1;
                        rdepth[y] = rdepth[x] + 1.0 / w;
                        stack.push(y);
                    }
                }
            }
        }
        let mut up = vec![parent];
        for k in 1..levels {
            let prev = &up[k - 1];
            let next = (0..n).map(|x| prev[prev[x]]).collect();
            up.push(next);
        }
        Self { up, depth, rdepth }
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        if self.depth[a] < self.depth[b] {
            std::mem::swap(&mut a, &mut b);
        }
        let diff = self.depth[a] - self.depth[b];
        for (k, row) in self.up.iter().enumerate() {
            if diff >> k & 1 == 1 {
                a = row[a];
            }
        }
        if a == b {
            return a;
        }
        for row in self.up.iter().rev() {
            if row[a] != row[b] {
                a = row[a];
                b = row[b];
            }
        }
        self.up[0][a]
    }

    fn resistance(&self, a: usize, b: usize) -> f64 {
        let c = self.lca(a, b);
        self.rdepth[a] + self.rdepth[b] - 2.0 * self.rdepth[c]
    }
}

/// Maximum-weight spanning tree of a connected `g`. Equal weights are
/// ordered by a seeded shuffle.
pub fn max_weight_spanning_tree(g: &DynamicGraph, seed: u64) -> Result<DynamicGraph, SparsifyError> {
    let n = g.vertex_count();
    let (k, _) = g.components();
    if n > 1 && k != 1 {
        return Err(SparsifyError::Disconnected(k));
    }
    let mut edges = g.sorted_edges();
    edges.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    edges.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut uf = UnionFind::new(n);
    let mut tree = DynamicGraph::new(n);
    for (u, v, w) in edges {
        if uf.union(u, v) {
            tree.insert_edge(u, v, w)?;
        }
    }
    Ok(tree)
}

/// Initial sparsifier: a maximum-weight spanning tree plus off-tree edges
/// taken in decreasing `w · R_tree` order, skipping edges similar to ones
/// already taken, until `density() ≥ target`.
///
/// A zero target yields the tree alone. Otherwise the result lies in
/// `[target, target + 1/n)` unless off-tree edges run out.
pub fn build_initial_sparsifier(
    g: &DynamicGraph,
    target_density: f64,
    seed: u64,
) -> Result<DynamicGraph, SparsifyError> {
    if !(target_density >= 0.0) {
        return Err(SparsifyError::InvalidParameter(format!(
            "target density must be non-negative, got {target_density}"
        )));
    }
    let n = g.vertex_count();
    let mut h = max_weight_spanning_tree(g, seed)?;
    let tree = TreeResistance::new(&h);
    let mut off: Vec<(usize, usize, f64, f64)> = g
        .sorted_edges()
        .into_iter()
        .filter(|&(u, v, _)| !h.has_edge(u, v))
        .map(|(u, v, w)| (u, v, w, w * tree.resistance(u, v)))
        .collect();
    off.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x0ff7_7ee5));
    off.sort_by(|a, b| b.3.total_cmp(&a.3));
    let want = off_tree_count(n, target_density).min(off.len());
    // Passes over the candidates in distortion order. Within a pass an edge
    // is skipped when both endpoints lie next to an edge already taken in that
    // pass; such edges mostly repair the same tree path.
    let mut taken = vec![false; off.len()];
    let mut count = 0;
    while count < want {
        let mut near = vec![false; n];
        for (i, &(u, v, w, _)) in off.iter().enumerate() {
            if count == want {
                break;
            }
            if taken[i] || (near[u] && near[v]) {
                continue;
            }
            taken[i] = true;
            count += 1;
            h.insert_edge(u, v, w)?;
            for x in [u, v] {
                near[x] = true;
                for &(y, _) in g.neighbors(x) {
                    near[y] = true;
                }
            }
        }
    }
    Ok(h)
}

/// Smallest off-tree edge count `k` with `(n − 1 + k)/n − 1 ≥ target`; zero
/// for a zero target.
fn off_tree_count(n: usize, target: f64) -> usize {
    if target <= 0.0 || n == 0 {
        return 0;
    }
    let density = |k: usize| (n - 1 + k) as f64 / n as f64 - 1.0;
    let mut k = (target * n as f64).ceil() as usize + 1;
    while k > 0 && density(k - 1) >= target {
        k -= 1;
    }
    while density(k) < target {
        k += 1;
    }
    k
}

/// Validates a user-supplied sparsifier against `g`: same vertex count, every
/// edge present in `g` with `g`'s weight, connected.
pub fn import_sparsifier(g: &DynamicGraph, h: DynamicGraph) -> Result<DynamicGraph, SparsifyError> {
    check_subgraph(g, &h)?;
    let (k, _) = h.components();
    if h.vertex_count() > 1 && k != 1 {
        return Err(SparsifyError::Disconnected(k));
    }
    Ok(h)
}

/// Reads a sparsifier file (MatrixMarket or edge list) and validates it.
pub fn import_sparsifier_file(
    g: &DynamicGraph,
    path: impl AsRef<std::path::Path>,
) -> Result<DynamicGraph, SparsifyError> {
    let h = crate::io::read_graph_file(path, Some(g.vertex_count()))?;
    import_sparsifier(g, h)
}

/// `K = ρ κ₀` clamped to `[K_MIN, K_MAX]`.
pub fn threshold_from_kappa(kappa: f64, rho: f64) -> f64 {
    (rho * kappa).clamp(K_MIN, K_MAX)
}

/// Estimates `κ(L_G, L_H)` and turns it into a distortion threshold.
///
/// Small graphs use the dense pencil. Larger ones run Lanczos with an
/// iteration budget of `max(20, probe_fraction · n)`; if that budget ends
/// before convergence the current Ritz estimate is used.
pub fn calibrate_threshold(
    st: &SparsifierState,
    probe_fraction: f64,
    rho: f64,
) -> Result<f64, SparsifyError> {
    if !(probe_fraction > 0.0 && probe_fraction <= 1.0) {
        return Err(SparsifyError::InvalidParameter(format!(
            "probe fraction must lie in (0, 1], got {probe_fraction}"
        )));
    }
    if !(rho > 0.0) {
        return Err(SparsifyError::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    let kappa = estimate_kappa(st.graph(), st.sparsifier(), probe_fraction)?;
    Ok(threshold_from_kappa(kappa, rho))
}

/// `κ(L_G, L_H)`: dense below 1000 vertices, Lanczos above, accepting the
/// Ritz estimate if the iteration budget runs out.
pub fn estimate_kappa(g: &DynamicGraph, h: &DynamicGraph, probe_fraction: f64) -> Result<f64, SparsifyError> {
    let (lg, lh): (SparseLaplacian, SparseLaplacian) = (g.laplacian(), h.laplacian());
    let n = g.vertex_count();
    if n <= 1000.min(DEFAULT_DENSE_CAP) {
        return Ok(condition_number(&lg, &lh, ConditionMethod::Dense, 0.0, 0)?.kappa);
    }
    let budget = ((probe_fraction * n as f64).ceil() as usize).max(20);
    match condition_number(&lg, &lh, ConditionMethod::Iterative, DEFAULT_LANCZOS_TOLERANCE, budget) {
        Ok(c) => Ok(c.kappa),
        Err(SpectralError::NotConverged {
            lambda_max_lower,
            lambda_min_bracket,
            ..
        }) => Ok(lambda_max_lower / lambda_min_bracket.1),
        Err(e) => Err(e.into()),
    }
}
