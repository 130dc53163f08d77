//! Shared fixtures for the benchmarks.

use dysparse_core::gen::{triangulated_mesh, WeightRange};
use dysparse_core::sparsify::{build_initial_sparsifier, SparsifierConfig, SparsifierState, UpdateMode};
use dysparse_core::stream::{generate_updates, InsertionLocality, StreamParams, UpdateStream};
use dysparse_core::{DynamicGraph, WalkConfig};

/// Mixed-weight triangulated `side × side` mesh and its 10% sparsifier.
pub fn mesh_pair(side: usize) -> (DynamicGraph, DynamicGraph) {
    let g = triangulated_mesh(side, side, WeightRange::new(0.5, 2.0), 1);
    let h = build_initial_sparsifier(&g, 0.1, 1).unwrap();
    (g, h)
}

/// Local insertions (`insert_frac · n`) plus deletions (`delete_frac · m`).
pub fn local_stream(g: &DynamicGraph, insert_frac: f64, delete_frac: f64, batches: usize) -> UpdateStream {
    generate_updates(
        g,
        &StreamParams {
            insert_frac,
            delete_frac,
            batches,
            seed: 7,
            locality: InsertionLocality::WithinHops(4),
        },
    )
    .unwrap()
}

pub fn state(g: &DynamicGraph, h: &DynamicGraph, k: f64, mode: UpdateMode) -> SparsifierState {
    let cfg = SparsifierConfig {
        walk: WalkConfig::new(k, 100, 16, 3).unwrap(),
        mode,
        ..Default::default()
    };
    SparsifierState::new(g.clone(), h.clone(), cfg).unwrap()
}
