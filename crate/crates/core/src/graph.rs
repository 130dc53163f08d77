//! Mutable weighted undirected graph.
//!
//! Every vertex owns a growable adjacency array of `(neighbor, weight)` pairs.
//! Insertions append into the array's spare capacity (amortized O(1) through
//! capacity doubling), deletions swap the entry with the last one and shrink
//! in place. There is never a global rebuild.
//!
//! The order of entries inside an adjacency array is not part of the
//! contract: a deletion permutes it.

use std::fmt;

use thiserror::Error;

use crate::laplacian::SparseLaplacian;

/// Dense 0-based vertex identifier.
pub type VertexId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),

    #[error("non-positive weight {weight} on edge ({u}, {v})")]
    NonPositiveWeight { u: VertexId, v: VertexId, weight: f64 },

    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: VertexId, n: usize },

    #[error("edge ({0}, {1}) is not present")]
    MissingEdge(VertexId, VertexId),
}

/// Result of [`DynamicGraph::insert_edge`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    /// The pair was not adjacent before.
    New,
    /// The pair already existed; weights were summed.
    Coalesced,
}

#[derive(Clone, Default)]
pub struct DynamicGraph {
    adjacency: Vec<Vec<(VertexId, f64)>>,
    edge_count: usize,
    total_weight: f64,
}

impl fmt::Debug for DynamicGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DynamicGraph")
            .field("vertex_count", &self.vertex_count())
            .field("edge_count", &self.edge_count)
            .field("total_weight", &self.total_weight)
            .finish()
    }
}

impl DynamicGraph {
    /// Graph on `n` isolated vertices.
    pub fn new(n: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); n],
            edge_count: 0,
            total_weight: 0.0,
        }
    }

    /// Builds a graph from `(u, v, w)` triples; duplicate pairs coalesce.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId, f64)>,
    {
        let mut g = Self::new(n);
        for (u, v, w) in edges {
            g.insert_edge(u, v, w)?;
        }
        Ok(g)
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sum of all edge weights, maintained incrementally.
    #[inline]
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Adjacency array of `u`. Constant time; stable until the next mutation.
    ///
    /// Panics if `u` is out of range.
    #[inline]
    pub fn neighbors(&self, u: VertexId) -> &[(VertexId, f64)] {
        &self.adjacency[u]
    }

    #[inline]
    pub fn degree(&self, u: VertexId) -> usize {
        self.adjacency[u].len()
    }

    pub fn weighted_degree(&self, u: VertexId) -> f64 {
        self.adjacency[u].iter().map(|&(_, w)| w).sum()
    }

    fn check_vertex(&self, vertex: VertexId) -> Result<(), GraphError> {
        if vertex < self.vertex_count() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex,
                n: self.vertex_count(),
            })
        }
    }

    fn position(&self, u: VertexId, v: VertexId) -> Option<usize> {
        self.adjacency[u].iter().position(|&(x, _)| x == v)
    }

    /// Weight of edge `(u, v)`, scanning the shorter of the two arrays.
    pub fn edge_weight(&self, u: VertexId, v: VertexId) -> Option<f64> {
        if u >= self.vertex_count() || v >= self.vertex_count() {
            return None;
        }
        let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        self.adjacency[a]
            .iter()
            .find(|&&(x, _)| x == b)
            .map(|&(_, w)| w)
    }

    #[inline]
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edge_weight(u, v).is_some()
    }

    /// Inserts `(u, v, w)`. An existing edge absorbs the weight (parallel
    /// conductances add).
    pub fn insert_edge(
        &mut self,
        u: VertexId,
        v: VertexId,
        w: f64,
    ) -> Result<InsertOutcome, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(GraphError::NonPositiveWeight { u, v, weight: w });
        }
        self.total_weight += w;
        match self.position(u, v) {
            Some(i) => {
                self.adjacency[u][i].1 += w;
                let j = self.position(v, u).expect("adjacency symmetry");
                self.adjacency[v][j].1 += w;
                Ok(InsertOutcome::Coalesced)
            }
            None => {
                self.adjacency[u].push((v, w));
                self.adjacency[v].push((u, w));
                self.edge_count += 1;
                Ok(InsertOutcome::New)
            }
        }
    }

    /// Overwrites the weight of an existing edge.
    pub fn set_edge_weight(&mut self, u: VertexId, v: VertexId, w: f64) -> Result<f64, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if !(w > 0.0) || !w.is_finite() {
            return Err(GraphError::NonPositiveWeight { u, v, weight: w });
        }
        let i = self.position(u, v).ok_or(GraphError::MissingEdge(u, v))?;
        let j = self.position(v, u).expect("adjacency symmetry");
        let old = self.adjacency[u][i].1;
        self.adjacency[u][i].1 = w;
        self.adjacency[v][j].1 = w;
        self.total_weight += w - old;
        Ok(old)
    }

    /// Removes `(u, v)` and returns its weight. On error the graph is untouched.
    pub fn delete_edge(&mut self, u: VertexId, v: VertexId) -> Result<f64, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let i = self.position(u, v).ok_or(GraphError::MissingEdge(u, v))?;
        let j = self.position(v, u).expect("adjacency symmetry");
        let (_, w) = self.adjacency[u].swap_remove(i);
        self.adjacency[v].swap_remove(j);
        self.edge_count -= 1;
        self.total_weight -= w;
        if self.edge_count == 0 {
            self.total_weight = 0.0;
        }
        Ok(w)
    }

    /// Each undirected edge once, as `(min, max, weight)`, in vertex order of
    /// the smaller endpoint (adjacency order within a vertex).
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, row)| {
            row.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    /// Edges sorted by endpoint pair; a canonical form independent of
    /// adjacency order.
    pub fn sorted_edges(&self) -> Vec<(VertexId, VertexId, f64)> {
        let mut e: Vec<_> = self.edges().collect();
        e.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        e
    }

    /// Off-tree density `m / n - 1`.
    pub fn density(&self) -> f64 {
        if self.vertex_count() == 0 {
            return 0.0;
        }
        self.edge_count as f64 / self.vertex_count() as f64 - 1.0
    }

    pub fn min_max_weight(&self) -> Option<(f64, f64)> {
        self.edges().fold(None, |acc, (_, _, w)| match acc {
            None => Some((w, w)),
            Some((lo, hi)) => Some((lo.min(w), hi.max(w))),
        })
    }

    /// Graph Laplacian `L = D - A` in CSR form.
    pub fn laplacian(&self) -> SparseLaplacian {
        SparseLaplacian::from_graph(self)
    }

    /// Component label per vertex (labels are 0..k in order of first vertex).
    pub fn components(&self) -> (usize, Vec<usize>) {
        let n = self.vertex_count();
        let mut label = vec![usize::MAX; n];
        let mut stack = Vec::new();
        let mut k = 0;
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = k;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if label[v] == usize::MAX {
                        label[v] = k;
                        stack.push(v);
                    }
                }
            }
            k += 1;
        }
        (k, label)
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() <= 1 || self.components().0 == 1
    }

    /// True when both graphs have the same vertex count and the same
    /// weighted edge set (weights compared exactly).
    pub fn same_edges(&self, other: &DynamicGraph) -> bool {
        self.vertex_count() == other.vertex_count() && self.sorted_edges() == other.sorted_edges()
    }

    /// Full scan of the structural invariants; `Err` describes the first
    /// violation found.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut entries = 0usize;
        for (u, row) in self.adjacency.iter().enumerate() {
            for (k, &(v, w)) in row.iter().enumerate() {
                if v >= self.vertex_count() {
                    return Err(format!("vertex {u} lists out-of-range neighbor {v}"));
                }
                if v == u {
                    return Err(format!("self-loop at {u}"));
                }
                if !(w > 0.0) {
                    return Err(format!("non-positive weight {w} on ({u}, {v})"));
                }
                if row[..k].iter().any(|&(x, _)| x == v) {
                    return Err(format!("duplicate entry ({u}, {v})"));
                }
                match self.adjacency[v].iter().find(|&&(x, _)| x == u) {
                    Some(&(_, wb)) if wb == w => {}
                    Some(&(_, wb)) => {
                        return Err(format!("asymmetric weight on ({u}, {v}): {w} vs {wb}"))
                    }
                    None => return Err(format!("({u}, {v}) has no mirror entry")),
                }
                entries += 1;
            }
        }
        if entries != 2 * self.edge_count {
            return Err(format!(
                "edge_count {} but {} adjacency entries",
                self.edge_count, entries
            ));
        }
        Ok(())
    }
}
