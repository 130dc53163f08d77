use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::info;

use dysparse_core::gen::{self, WeightRange};
use dysparse_core::io::{read_graph_file, save_matrix_market, IoError};
use dysparse_core::factor::FactorError;
use dysparse_core::solver::{pcg_solve, random_rhs};
use dysparse_core::sparsify::{
    build_initial_sparsifier, calibrate_threshold, import_sparsifier_file, InsertionPolicy, SparsifierConfig,
    SparsifierState, SparsifyError, UpdateMode,
};
use dysparse_core::spectral::{condition_number, ConditionEstimate, ConditionMethod, SpectralError};
use dysparse_core::stream::{generate_updates, read_stream, save_stream, InsertionLocality, StreamError, StreamParams};
use dysparse_core::{build_preconditioner, DynamicGraph, SolverError, WalkConfig, WalkError};

use crate::args::*;
use crate::manifest::{RunManifest, WalkSettings};
use crate::{EXIT_DATA, EXIT_NUMERICAL, EXIT_USAGE};

/// Raised when an iterative method stops short of its tolerance.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct NumericalFailure(String);

/// Bad flag values that clap cannot check on its own.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(String);

/// Carries the exit code of a nested run (`rerun`).
#[derive(Debug, thiserror::Error)]
#[error("rerun failed")]
struct Coded(u8);

pub fn dispatch(cmd: Command, args: &[OsString]) -> Result<()> {
    match cmd {
        Command::GenGraph(a) => gen_graph(a, args),
        Command::Sparsify(a) => sparsify(a, args),
        Command::GenUpdates(a) => gen_updates(a, args),
        Command::Replay(a) => replay(a, args),
        Command::Solve(a) => solve(a),
        Command::Eval(a) => eval(a),
        Command::Rerun(a) => rerun(a),
    }
}

fn spectral_code(e: &SpectralError) -> u8 {
    match e {
        SpectralError::NotConverged { .. } | SpectralError::NotPositiveDefinite => EXIT_NUMERICAL,
        SpectralError::Solver(s) => solver_code(s),
        _ => EXIT_DATA,
    }
}

fn solver_code(e: &SolverError) -> u8 {
    match e {
        SolverError::Factor(FactorError::Disconnected(_)) | SolverError::Disconnected(_) => EXIT_DATA,
        SolverError::Factor(_) => EXIT_NUMERICAL,
        SolverError::DimensionMismatch { .. } => EXIT_DATA,
    }
}

fn sparsify_code(e: &SparsifyError) -> u8 {
    match e {
        SparsifyError::Spectral(s) => spectral_code(s),
        SparsifyError::Event { source, .. } => sparsify_code(source),
        _ => EXIT_DATA,
    }
}

/// Maps an error chain to a process exit code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(Coded(c)) = cause.downcast_ref::<Coded>() {
            return *c;
        }
        if cause.is::<NumericalFailure>() {
            return EXIT_NUMERICAL;
        }
        if let Some(e) = cause.downcast_ref::<SpectralError>() {
            return spectral_code(e);
        }
        if let Some(e) = cause.downcast_ref::<SolverError>() {
            return solver_code(e);
        }
        if let Some(e) = cause.downcast_ref::<SparsifyError>() {
            return sparsify_code(e);
        }
        if cause.is::<IoError>() || cause.is::<StreamError>() || cause.is::<WalkError>() {
            return EXIT_DATA;
        }
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
    }
    EXIT_DATA
}

fn load_graph(path: &Path) -> Result<DynamicGraph> {
    let g = read_graph_file(path, None).with_context(|| format!("reading graph {}", path.display()))?;
    if g.vertex_count() == 0 {
        bail!("graph {} has no vertices", path.display());
    }
    Ok(g)
}

fn load_pair(graph: &Path, sparsifier: &Path) -> Result<(DynamicGraph, DynamicGraph)> {
    let g = load_graph(graph)?;
    let h = import_sparsifier_file(&g, sparsifier)
        .with_context(|| format!("importing sparsifier {}", sparsifier.display()))?;
    Ok((g, h))
}

fn write_graph(g: &DynamicGraph, path: &Path) -> Result<()> {
    save_matrix_market(g, path).with_context(|| format!("writing {}", path.display()))
}

fn pick_method(method: KappaMethod, n: usize) -> ConditionMethod {
    match method {
        KappaMethod::Dense => ConditionMethod::Dense,
        KappaMethod::Iterative => ConditionMethod::Iterative,
        KappaMethod::Auto if n <= 1000 => ConditionMethod::Dense,
        KappaMethod::Auto => ConditionMethod::Iterative,
    }
}

fn kappa(g: &DynamicGraph, h: &DynamicGraph, method: ConditionMethod, tol: f64, max_iter: usize) -> Result<ConditionEstimate> {
    condition_number(&g.laplacian(), &h.laplacian(), method, tol, max_iter).context("estimating the condition number")
}

fn method_name(m: ConditionMethod) -> &'static str {
    match m {
        ConditionMethod::Dense => "dense",
        ConditionMethod::Iterative => "iterative",
    }
}

fn gen_graph(a: GenGraphArgs, args: &[OsString]) -> Result<()> {
    if !(a.wmin > 0.0 && a.wmin <= a.wmax && a.wmax.is_finite()) {
        bail!(UsageError(format!("weights need 0 < wmin <= wmax, got [{}, {}]", a.wmin, a.wmax)));
    }
    let w = WeightRange::new(a.wmin, a.wmax);
    let g = match a.kind {
        GraphKind::Grid => gen::grid(a.rows, a.cols, w, a.seed),
        GraphKind::Mesh => gen::triangulated_mesh(a.rows, a.cols, w, a.seed),
        GraphKind::Random => gen::random_connected(a.n, a.extra, w, a.seed),
        GraphKind::Tree => gen::random_tree(a.n, w, a.seed),
    };
    let g = if a.pendant { gen::with_pendant(&g, 0, a.wmin) } else { g };
    write_graph(&g, &a.out)?;
    RunManifest::new("gen-graph", args, vec![], a.seed).save_next_to(&a.out)?;
    println!("n={} m={} d_g={}", g.vertex_count(), g.edge_count(), g.density());
    Ok(())
}

fn sparsify(a: SparsifyArgs, args: &[OsString]) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let h = build_initial_sparsifier(&g, a.density, a.seed)?;
    write_graph(&h, &a.out)?;
    RunManifest::new("sparsify", args, vec![a.graph.clone()], a.seed).save_next_to(&a.out)?;
    let mut line = format!(
        "n={} m_g={} m_h={} d_g={} d_h={}",
        g.vertex_count(),
        g.edge_count(),
        h.edge_count(),
        g.density(),
        h.density()
    );
    if !a.no_eval {
        let method = pick_method(KappaMethod::Auto, g.vertex_count());
        let est = kappa(&g, &h, method, 1e-6, 2000)?;
        write!(line, " kappa={} method={}", est.kappa, method_name(method))?;
    }
    println!("{line}");
    Ok(())
}

fn gen_updates(a: GenUpdatesArgs, args: &[OsString]) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let params = StreamParams {
        insert_frac: a.insert_frac,
        delete_frac: a.delete_frac,
        batches: a.batches,
        seed: a.seed,
        locality: match a.max_hops {
            None => InsertionLocality::Uniform,
            Some(h) if a.long_range > 0.0 => InsertionLocality::Mixed {
                max_hops: h,
                long_range: a.long_range,
            },
            Some(h) => InsertionLocality::WithinHops(h),
        },
    };
    let s = generate_updates(&g, &params)?;
    save_stream(&s, &a.out)?;
    RunManifest::new("gen-updates", args, vec![a.graph.clone()], a.seed).save_next_to(&a.out)?;
    println!(
        "insertions={} deletions={} batches={}",
        s.insertion_count(),
        s.deletion_count(),
        s.batch_count()
    );
    Ok(())
}

const CSV_HEADER: &str = "batch,insertions,kept,pruned,deletions,deletions_in_h,recovered_paths,recovered_edges,fallbacks,walker_steps,max_event_steps,d_g,d_h,kappa";

fn replay(a: ReplayArgs, args: &[OsString]) -> Result<()> {
    let (g, h) = load_pair(&a.graph, &a.sparsifier)?;
    let n = g.vertex_count();
    let stream = read_stream(&a.stream).with_context(|| format!("reading stream {}", a.stream.display()))?;
    stream
        .validate(n)
        .with_context(|| format!("stream {} does not match the graph", a.stream.display()))?;
    if a.s == 0 || a.t == 0 {
        bail!(UsageError("--T and --s must be positive".into()));
    }

    let policy = match (a.freeze_h, a.k) {
        (true, _) => InsertionPolicy::Freeze,
        (false, Some(k)) if k == 0.0 => InsertionPolicy::KeepAll,
        _ => InsertionPolicy::Filter,
    };
    let mut cfg = SparsifierConfig {
        walk: WalkConfig {
            distortion_threshold: 1.0,
            step_cap: a.t,
            walker_count: a.s,
            global_seed: a.seed,
        },
        policy,
        mode: match a.mode {
            Mode::Immediate => UpdateMode::Immediate,
            Mode::Batched => UpdateMode::Batched,
        },
        ..Default::default()
    };
    let mut st = SparsifierState::new(g, h, cfg)?;
    let threshold = match a.k {
        Some(k) if k < 0.0 || !k.is_finite() => {
            bail!(UsageError(format!("--K must be a non-negative number, got {k}")))
        }
        Some(k) if k > 0.0 => Some(k),
        Some(_) => None,
        None if policy == InsertionPolicy::Filter => Some(calibrate_threshold(&st, a.probe_fraction, a.rho)?),
        None => None,
    };
    if let Some(k) = threshold {
        cfg.walk.distortion_threshold = k;
        st.set_config(cfg)?;
        info!("distortion threshold K = {k}");
    }

    let method = pick_method(a.kappa_method, n);
    let eval_kappa = |st: &SparsifierState| -> Result<String> {
        let est = kappa(st.graph(), st.sparsifier(), method, 1e-6, 2000)?;
        Ok(format!("{}", est.kappa))
    };
    let batches = stream.batches();
    let wants_kappa = |i: usize| a.eval_every > 0 && (i % a.eval_every == 0 || i == batches.len());

    let mut csv = String::from(CSV_HEADER);
    if a.with_timing {
        csv.push_str(",wall_seconds");
    }
    csv.push('\n');
    let k0 = if wants_kappa(0) { eval_kappa(&st)? } else { String::new() };
    write!(
        csv,
        "0,0,0,0,0,0,0,0,0,0,0,{},{},{}",
        st.graph().density(),
        st.sparsifier().density(),
        k0
    )?;
    if a.with_timing {
        csv.push_str(",0");
    }
    csv.push('\n');

    for (i, &(first, events)) in batches.iter().enumerate() {
        let index = i + 1;
        let r = st.replay_batch(index, first, events, &mut |_| {})?;
        let k = if wants_kappa(index) { eval_kappa(&st)? } else { String::new() };
        write!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            index,
            r.insertions,
            r.kept,
            r.pruned,
            r.deletions,
            r.deletions_in_h,
            r.paths_recovered,
            r.edges_recovered,
            r.fallbacks,
            r.walker_steps,
            r.max_event_steps,
            r.density_g,
            r.density_h,
            k
        )?;
        if a.with_timing {
            write!(csv, ",{}", r.wall_seconds)?;
        }
        csv.push('\n');
    }

    std::fs::write(&a.out, &csv).with_context(|| format!("writing {}", a.out.display()))?;
    let mut m = RunManifest::new(
        "replay",
        args,
        vec![a.graph.clone(), a.sparsifier.clone(), a.stream.clone()],
        a.seed,
    );
    m.walk = Some(WalkSettings {
        distortion_threshold: threshold,
        step_cap: a.t,
        walker_count: a.s,
        global_seed: a.seed,
    });
    m.mode = Some(format!("{:?}", a.mode).to_lowercase());
    m.save_next_to(&a.out)?;
    if let Some(p) = &a.final_sparsifier {
        write_graph(st.sparsifier(), p)?;
    }
    if let Some(p) = &a.final_graph {
        write_graph(st.graph(), p)?;
    }
    Ok(())
}

fn read_rhs(spec: &str, n: usize, seed: u64) -> Result<Vec<f64>> {
    if spec == "random" {
        return Ok(random_rhs(n, seed));
    }
    let path = PathBuf::from(spec);
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut b = Vec::with_capacity(n);
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            continue;
        }
        let x: f64 = t
            .parse()
            .map_err(|e| IoError::Parse { line: i + 1, msg: format!("bad value: {e}") })?;
        b.push(x);
    }
    if b.len() != n {
        bail!(SolverError::DimensionMismatch { expected: n, got: b.len() });
    }
    let mean = b.iter().sum::<f64>() / n as f64;
    b.iter_mut().for_each(|x| *x -= mean);
    Ok(b)
}

fn solve(a: SolveArgs) -> Result<()> {
    let (g, h) = load_pair(&a.graph, &a.sparsifier)?;
    let b = read_rhs(&a.rhs, g.vertex_count(), a.seed)?;
    let m = build_preconditioner(&h)?;
    let r = pcg_solve(&g.laplacian(), &b, &m, a.tol, a.max_iter)?;
    println!(
        "iterations={} relative_residual={:e} converged={} tol={:e} d_h={}",
        r.iterations,
        r.relative_residual,
        r.converged,
        a.tol,
        h.density()
    );
    if !r.converged {
        bail!(NumericalFailure(format!(
            "PCG stopped after {} iterations at relative residual {:e}",
            r.iterations, r.relative_residual
        )));
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let (g, h) = load_pair(&a.graph, &a.sparsifier)?;
    let method = pick_method(a.method, g.vertex_count());
    let est = kappa(&g, &h, method, a.tol, a.max_iter)?;
    println!(
        "kappa={} lambda_max={} lambda_min={} d_h={} method={} iterations={}",
        est.kappa,
        est.lambda_max,
        est.lambda_min,
        h.density(),
        method_name(method),
        est.iterations_used
    );
    Ok(())
}

fn rerun(a: RerunArgs) -> Result<()> {
    let m = RunManifest::load(&a.manifest)?;
    if m.version != env!("CARGO_PKG_VERSION") {
        log::warn!("manifest was written by version {}, this is {}", m.version, env!("CARGO_PKG_VERSION"));
    }
    let mut argv = vec![OsString::from("dysparse")];
    argv.extend(m.replay_args(a.out.as_deref()));
    crate::run(argv).map_err(|(code, e)| e.context(Coded(code)))
}
