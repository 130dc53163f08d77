#![allow(dead_code)]

use dysparse_core::gen::{random_connected, with_pendant, WeightRange};
use dysparse_core::DynamicGraph;
use proptest::prelude::*;

/// Connected graph with mixed weights in [0.1, 10].
pub fn connected(n: usize, extra: usize, seed: u64) -> DynamicGraph {
    random_connected(n, extra, WeightRange::new(0.1, 10.0), seed)
}

/// Connected graph plus one pendant leaf.
pub fn connected_with_leaf(n: usize, extra: usize, seed: u64) -> DynamicGraph {
    let g = connected(n, extra, seed);
    with_pendant(&g, (seed as usize) % n, 1.0 + (seed % 5) as f64)
}

pub fn small_connected() -> impl Strategy<Value = DynamicGraph> {
    (3usize..25, 0usize..40, any::<u64>()).prop_map(|(n, extra, seed)| connected(n, extra, seed))
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Unit-weight 26-vertex graph of the insertion/deletion walkthrough.
/// `H0` is a spanning tree; `G0` adds a few off-tree edges.
pub fn case_study() -> (DynamicGraph, DynamicGraph) {
    let tree = [
        (25, 20), (20, 19), (20, 22), (22, 17), (22, 21), (17, 16), (16, 15), (15, 14),
        (14, 13), (13, 12), (19, 18), (18, 11), (11, 10), (10, 9), (9, 8), (8, 7), (7, 6),
        (6, 5), (5, 4), (4, 3), (3, 2), (2, 1), (1, 0), (12, 23), (23, 24),
    ];
    let off_tree = [(24, 25, 1.0), (16, 21, 1.0), (15, 23, 0.5), (23, 17, 1.0), (0, 5, 1.0), (3, 8, 1.0), (13, 24, 1.0)];
    let h = DynamicGraph::from_edges(26, tree.iter().map(|&(u, v)| (u, v, 1.0))).unwrap();
    let g = DynamicGraph::from_edges(
        26,
        tree.iter().map(|&(u, v)| (u, v, 1.0)).chain(off_tree),
    )
    .unwrap();
    (g, h)
}
