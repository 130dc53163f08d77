//! Dynamic spectral sparsification of weighted undirected graphs.
//!
//! [`DynamicGraph`] stores `G` and its sparsifier `H`. [`SparsifierState`]
//! keeps `H ⊆ G` spectrally close to `G` while a stream of insertions and
//! deletions is applied: insertions are filtered by seeded non-backtracking
//! random walks on `H` ([`walk`]), deletions are repaired by walk-recovered
//! paths on `G`. [`spectral`] and [`solver`] measure the result: effective
//! resistance, relative condition number `κ(L_G, L_H)` and preconditioned CG
//! iteration counts.

pub mod factor;
pub mod gen;
pub mod graph;
pub mod io;
pub mod laplacian;
pub mod solver;
pub mod sparsify;
pub mod spectral;
pub mod stream;
pub mod walk;

pub use graph::{DynamicGraph, GraphError, InsertOutcome, VertexId};
pub use laplacian::SparseLaplacian;
pub use solver::{build_preconditioner, pcg_solve, PcgResult, Preconditioner, SolverError};
pub use sparsify::{
    build_initial_sparsifier, calibrate_threshold, import_sparsifier, BatchReport, DeletionKind,
    DeletionOutcome, InsertionDecision, InsertionOutcome, InsertionPolicy, SparsifierConfig,
    SparsifierState, SparsifyError, UpdateMode, UpdateReport,
};
pub use spectral::{
    condition_number, effective_resistance_exact, ConditionEstimate, ConditionMethod, DenseSpectrum,
    EigenBasis, ResistanceQuery, SpectralError,
};
pub use stream::{EdgeEvent, EventKind, UpdateStream};
pub use walk::{nbrw_min_path, nbrw_reach, ReachVerdict, WalkConfig, WalkError, WalkTrace};
