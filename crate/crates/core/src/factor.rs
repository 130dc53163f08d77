//! Exact sparse elimination of a connected graph Laplacian.
//!
//! Eliminating a vertex of a Laplacian leaves a Laplacian (the Schur
//! complement), so the factorization is carried out directly on a weighted
//! graph: removing `v` with weighted degree `d` adds `w_va · w_vb / d` to every
//! pair of its neighbors. Vertices go in minimum-degree order; vertex 0 is
//! the ground and is never eliminated, which makes the reduced system
//! nonsingular. Solutions are re-centered to zero mean, so the factor acts as
//! the pseudo-inverse on the zero-mean subspace.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::graph::DynamicGraph;
use crate::laplacian::SparseLaplacian;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactorError {
    #[error("graph is disconnected ({0} components)")]
    Disconnected(usize),

    #[error("fill exceeds the limit of {0} stored entries")]
    FillLimit(usize),

    #[error("pivot degree {degree} exceeds the limit of {limit}")]
    DenseCore { degree: usize, limit: usize },

    #[error("zero pivot while eliminating vertex {0}")]
    ZeroPivot(usize),
}

/// Size limits beyond which the factorization gives up (callers fall back to
/// an iterative inner solve).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorLimits {
    pub max_fill: usize,
    pub max_pivot_degree: usize,
}

impl Default for FactorLimits {
    fn default() -> Self {
        Self {
            max_fill: 8_000_000,
            max_pivot_degree: 400,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LaplacianFactor {
    n: usize,
    order: Vec<usize>,
    pivots: Vec<f64>,
    ptr: Vec<usize>,
    nbr: Vec<usize>,
    wt: Vec<f64>,
}

/// Adds `fill` (sorted by vertex) into `row` (sorted), dropping `removed`.
fn merge_row(row: &[(usize, f64)], fill: &[(usize, f64)], removed: usize, out: &mut Vec<(usize, f64)>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < fill.len() {
        let take_row = j >= fill.len() || (i < row.len() && row[i].0 <= fill[j].0);
        if take_row {
            let (a, w) = row[i];
            i += 1;
            if a == removed {
                continue;
            }
            if j < fill.len() && fill[j].0 == a {
                out.push((a, w + fill[j].1));
                j += 1;
            } else {
                out.push((a, w));
            }
        } else {
            out.push(fill[j]);
            j += 1;
        }
    }
}

impl LaplacianFactor {
    pub fn new(g: &DynamicGraph) -> Result<Self, FactorError> {
        Self::from_laplacian(&g.laplacian(), FactorLimits::default())
    }

    pub fn with_limits(g: &DynamicGraph, limits: FactorLimits) -> Result<Self, FactorError> {
        Self::from_laplacian(&g.laplacian(), limits)
    }

    pub fn from_laplacian(l: &SparseLaplacian, limits: FactorLimits) -> Result<Self, FactorError> {
        let n = l.dim();
        let (k, _) = l.components();
        if n > 1 && k != 1 {
            return Err(FactorError::Disconnected(k));
        }

        // rows come out of the CSR already sorted by column
        let mut adj: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|u| {
                l.row(u)
                    .filter(|&(v, a)| v != u && a != 0.0)
                    .map(|(v, a)| (v, -a))
                    .collect()
            })
            .collect();
        let mut eliminated = vec![false; n];
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
            (1..n).map(|v| Reverse((adj[v].len(), v))).collect();

        let mut order = Vec::with_capacity(n.saturating_sub(1));
        let mut pivots = Vec::with_capacity(n.saturating_sub(1));
        let mut ptr = vec![0];
        let mut nbr = Vec::new();
        let mut wt = Vec::new();
        let mut fill = Vec::new();
        let mut scratch = Vec::new();

        while let Some(Reverse((deg, v))) = heap.pop() {
            if eliminated[v] || adj[v].len() != deg {
                continue;
            }
            if deg > limits.max_pivot_degree {
                return Err(FactorError::DenseCore {
                    degree: deg,
                    limit: limits.max_pivot_degree,
                });
            }
            let row = std::mem::take(&mut adj[v]);
            let d: f64 = row.iter().map(|&(_, w)| w).sum();
            if !(d > 0.0) {
                return Err(FactorError::ZeroPivot(v));
            }
            eliminated[v] = true;
            order.push(v);
            pivots.push(d);
            for &(a, w) in &row {
                nbr.push(a);
                wt.push(w);
            }
            ptr.push(nbr.len());
            if nbr.len() > limits.max_fill {
                return Err(FactorError::FillLimit(limits.max_fill));
            }

            for &(a, wa) in &row {
                fill.clear();
                fill.extend(
                    row.iter()
                        .filter(|&&(b, _)| b != a)
                        .map(|&(b, wb)| (b, wa * wb / d)),
                );
                merge_row(&adj[a], &fill, v, &mut scratch);
                std::mem::swap(&mut adj[a], &mut scratch);
                if a != 0 {
                    heap.push(Reverse((adj[a].len(), a)));
                }
            }
        }

        Ok(Self {
            n,
            order,
            pivots,
            ptr,
            nbr,
            wt,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored multiplier entries.
    pub fn fill(&self) -> usize {
        self.nbr.len()
    }

    /// Zero-mean `x` with `L x = b - mean(b)`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y = b.to_vec();
        center(&mut y);
        for (k, &v) in self.order.iter().enumerate() {
            let t = y[v] / self.pivots[k];
            for idx in self.ptr[k]..self.ptr[k + 1] {
                y[self.nbr[idx]] += self.wt[idx] * t;
            }
        }
        let mut x = vec![0.0; self.n];
        for (k, &v) in self.order.iter().enumerate().rev() {
            let mut s = y[v];
            for idx in self.ptr[k]..self.ptr[k + 1] {
                s += self.wt[idx] * x[self.nbr[idx]];
            }
            x[v] = s / self.pivots[k];
        }
        center(&mut x);
        x
    }
}

pub(crate) fn center(x: &mut [f64]) {
    if x.is_empty() {
        return;
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}
