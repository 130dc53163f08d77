//! Seeded synthetic graph families.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::DynamicGraph;

/// Edge weights drawn uniformly from `[lo, hi]`; `lo == hi` gives constant
/// weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightRange {
    pub lo: f64,
    pub hi: f64,
}

impl WeightRange {
    pub const UNIT: WeightRange = WeightRange { lo: 1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo > 0.0 && hi >= lo, "weight range must satisfy 0 < lo <= hi");
        Self { lo, hi }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.hi > self.lo {
            rng.random_range(self.lo..=self.hi)
        } else {
            self.lo
        }
    }
}

fn build(n: usize, edges: Vec<(usize, usize, f64)>) -> DynamicGraph {
    DynamicGraph::from_edges(n, edges).expect("generator emits valid edges")
}

/// `rows × cols` 4-neighbor grid. Vertex `(i, j)` is `i * cols + j`.
pub fn grid(rows: usize, cols: usize, weights: WeightRange, seed: u64) -> DynamicGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |i: usize, j: usize| i * cols + j;
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            if j + 1 < cols {
                edges.push((id(i, j), id(i, j + 1), weights.sample(&mut rng)));
            }
            if i + 1 < rows {
                edges.push((id(i, j), id(i + 1, j), weights.sample(&mut rng)));
            }
        }
    }
    build(rows * cols, edges)
}

/// Grid with one randomly oriented diagonal per cell: a planar triangle
/// mesh with about `3n` edges, similar in shape to 2-D finite-element meshes.
pub fn triangulated_mesh(rows: usize, cols: usize, weights: WeightRange, seed: u64) -> DynamicGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |i: usize, j: usize| i * cols + j;
    let mut edges = Vec::with_capacity(3 * rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            if j + 1 < cols {
                edges.push((id(i, j), id(i, j + 1), weights.sample(&mut rng)));
            }
            if i + 1 < rows {
                edges.push((id(i, j), id(i + 1, j), weights.sample(&mut rng)));
            }
            if i + 1 < rows && j + 1 < cols {
                let e = if rng.random::<bool>() {
                    (id(i, j), id(i + 1, j + 1))
                } else {
                    (id(i, j + 1), id(i + 1, j))
                };
                edges.push((e.0, e.1, weights.sample(&mut rng)));
            }
        }
    }
    build(rows * cols, edges)
}

/// Uniformly random recursive tree: after a random relabeling, vertex `i`
/// attaches to a uniform earlier vertex.
pub fn random_tree(n: usize, weights: WeightRange, seed: u64) -> DynamicGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build(n, tree_edges(n, weights, &mut rng))
}

fn tree_edges<R: Rng>(n: usize, weights: WeightRange, rng: &mut R) -> Vec<(usize, usize, f64)> {
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(rng);
    (1..n)
        .map(|i| {
            let j = rng.random_range(0..i);
            (label[i], label[j], weights.sample(rng))
        })
        .collect()
}

/// Random tree plus `extra` additional distinct random edges (fewer if the
/// graph fills up).
pub fn random_connected(n: usize, extra: usize, weights: WeightRange, seed: u64) -> DynamicGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = build(n, tree_edges(n, weights, &mut rng));
    let max_edges = n * n.saturating_sub(1) / 2;
    let target = (g.edge_count() + extra).min(max_edges);
    let mut attempts = 0;
    while g.edge_count() < target && attempts < 100 * (extra + 10) {
        attempts += 1;
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v || g.has_edge(u, v) {
            continue;
        }
        let w = weights.sample(&mut rng);
        g.insert_edge(u, v, w).expect("checked pair");
    }
    g
}

/// Copy of `g` with one extra vertex attached to `anchor` by an edge of
/// weight `w`.
pub fn with_pendant(g: &DynamicGraph, anchor: usize, w: f64) -> DynamicGraph {
    let n = g.vertex_count();
    let edges = g.sorted_edges().into_iter().chain([(anchor, n, w)]);
    DynamicGraph::from_edges(n + 1, edges).expect("valid pendant")
}
