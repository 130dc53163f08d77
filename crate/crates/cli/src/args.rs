use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "dysparse", version, about = "Dynamic spectral sparsification of weighted graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic graph as MatrixMarket.
    GenGraph(GenGraphArgs),
    /// Build an initial sparsifier (spanning tree plus off-tree edges).
    Sparsify(SparsifyArgs),
    /// Generate a seeded update stream for a graph.
    GenUpdates(GenUpdatesArgs),
    /// Replay an update stream and write a per-batch CSV report.
    Replay(ReplayArgs),
    /// Solve L_G x = b by PCG preconditioned with the sparsifier.
    Solve(SolveArgs),
    /// Report the relative condition number of a graph and sparsifier.
    Eval(EvalArgs),
    /// Re-run a command from its manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Grid,
    Mesh,
    Random,
    Tree,
}

#[derive(Debug, Args)]
pub struct GenGraphArgs {
    #[arg(long, value_enum)]
    pub kind: GraphKind,
    /// Rows (grid, mesh).
    #[arg(long, default_value_t = 64)]
    pub rows: usize,
    /// Columns (grid, mesh).
    #[arg(long, default_value_t = 64)]
    pub cols: usize,
    /// Vertices (random, tree).
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Edges beyond a spanning tree (random).
    #[arg(long, default_value_t = 1000)]
    pub extra: usize,
    #[arg(long, default_value_t = 1.0)]
    pub wmin: f64,
    #[arg(long, default_value_t = 1.0)]
    pub wmax: f64,
    /// Attach one degree-1 vertex to vertex 0.
    #[arg(long)]
    pub pendant: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SparsifyArgs {
    pub graph: PathBuf,
    /// Off-tree edges per vertex.
    #[arg(long, default_value_t = 0.1)]
    pub density: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Skip the condition-number estimate in the stats line.
    #[arg(long)]
    pub no_eval: bool,
}

#[derive(Debug, Args)]
pub struct GenUpdatesArgs {
    pub graph: PathBuf,
    /// Insertions as a fraction of the vertex count.
    #[arg(long, default_value_t = 0.0)]
    pub insert_frac: f64,
    /// Deletions as a fraction of the edge count.
    #[arg(long, default_value_t = 0.0)]
    pub delete_frac: f64,
    #[arg(long, default_value_t = 1)]
    pub batches: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pick each inserted edge's second endpoint by a random walk of
    /// 2..=H hops from the first instead of uniformly.
    #[arg(long, value_name = "H")]
    pub max_hops: Option<usize>,
    /// With --max-hops, the fraction of insertions that are uniform instead.
    #[arg(long, value_name = "F", requires = "max_hops", default_value_t = 0.0)]
    pub long_range: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Immediate,
    Batched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KappaMethod {
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub graph: PathBuf,
    pub sparsifier: PathBuf,
    pub stream: PathBuf,
    /// Distortion threshold; 0 keeps every insertion.
    #[arg(long = "K", value_name = "K", conflicts_with = "auto_k")]
    pub k: Option<f64>,
    /// Calibrate K from the initial condition number.
    #[arg(long = "auto-K")]
    pub auto_k: bool,
    /// Scale factor for --auto-K.
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    /// Lanczos budget for --auto-K as a fraction of the vertex count.
    #[arg(long, default_value_t = 0.05)]
    pub probe_fraction: f64,
    /// Step cap per walker.
    #[arg(long = "T", value_name = "T", default_value_t = 100)]
    pub t: usize,
    /// Walkers per query.
    #[arg(long = "s", value_name = "S", default_value_t = 16)]
    pub s: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Batched)]
    pub mode: Mode,
    /// Evaluate the condition number every N batches (0: never).
    #[arg(long, default_value_t = 0)]
    pub eval_every: usize,
    #[arg(long, value_enum, default_value_t = KappaMethod::Auto)]
    pub kappa_method: KappaMethod,
    /// Never add inserted edges to the sparsifier.
    #[arg(long = "freeze-H", alias = "freeze-h")]
    pub freeze_h: bool,
    /// Add a wall-time column (makes output run-dependent).
    #[arg(long)]
    pub with_timing: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the final sparsifier here.
    #[arg(long)]
    pub final_sparsifier: Option<PathBuf>,
    /// Write the final graph here.
    #[arg(long)]
    pub final_graph: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub graph: PathBuf,
    pub sparsifier: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `random` or a file with one value per line.
    #[arg(long, default_value = "random")]
    pub rhs: String,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub graph: PathBuf,
    pub sparsifier: PathBuf,
    #[arg(long, value_enum, default_value_t = KappaMethod::Auto)]
    pub method: KappaMethod,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    /// Write the primary output here instead of the recorded path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
