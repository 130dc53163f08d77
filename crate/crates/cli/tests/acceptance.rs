//! End-to-end acceptance checks. Prints one `[PASS]`/`[FAIL]` line per
//! criterion and exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use dysparse_core::gen::{grid, random_connected, random_tree, triangulated_mesh, with_pendant, WeightRange};
use dysparse_core::io::save_matrix_market;
use dysparse_core::solver::{build_preconditioner, pcg_solve, random_rhs};
use dysparse_core::sparsify::{
    build_initial_sparsifier, calibrate_threshold, check_subgraph, DeletionKind, EventRecord, InsertionDecision,
    InsertionPolicy, SparsifierConfig, SparsifierState, UpdateMode, UpdateReport, DEFAULT_RHO,
};
use dysparse_core::spectral::{
    commute_time_estimate, condition_number, eigen_perturbation, generalized_eigenvalues_dense, ConditionMethod,
    DenseSpectrum, ResistanceOracle,
};
use dysparse_core::stream::{generate_updates, save_stream, InsertionLocality, StreamParams};
use dysparse_core::walk::{nbrw_reach, WalkConfig};
use dysparse_core::DynamicGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

impl Check {
    fn new(id: &'static str, title: &'static str, pass: bool, detail: String) -> Self {
        Self {
            id,
            title,
            pass,
            detail,
        }
    }
}

/// Largest per-event walker-step total seen in a run, against its `s · T`.
struct StepAudit {
    label: String,
    max_event_steps: usize,
    bound: usize,
    events: usize,
}

#[derive(Default)]
struct Audit {
    runs: Vec<StepAudit>,
}

impl Audit {
    fn record(&mut self, label: &str, cfg: &SparsifierConfig, records: &[EventRecord]) {
        self.runs.push(StepAudit {
            label: label.into(),
            max_event_steps: records.iter().map(|r| r.outcome.steps_used()).max().unwrap_or(0),
            bound: cfg.walk.walker_count * cfg.walk.step_cap,
            events: records.len(),
        });
    }
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn kappa(g: &DynamicGraph, h: &DynamicGraph) -> f64 {
    let method = if g.vertex_count() <= 1000 {
        ConditionMethod::Dense
    } else {
        ConditionMethod::Iterative
    };
    condition_number(&g.laplacian(), &h.laplacian(), method, 1e-6, 4000)
        .expect("condition number")
        .kappa
}

/// `κ(L_G, L_H)` over the connected components of `G`; infinite when `H`
/// splits one of them.
fn kappa_by_component(g: &DynamicGraph, h: &DynamicGraph) -> f64 {
    let (k, label) = g.components();
    if k == 1 {
        return kappa(g, h);
    }
    let mut worst: f64 = 1.0;
    for c in 0..k {
        let verts: Vec<usize> = (0..g.vertex_count()).filter(|&v| label[v] == c).collect();
        if verts.len() < 2 {
            continue;
        }
        let mut index = vec![usize::MAX; g.vertex_count()];
        for (i, &v) in verts.iter().enumerate() {
            index[v] = i;
        }
        let induced = |x: &DynamicGraph| {
            DynamicGraph::from_edges(
                verts.len(),
                x.sorted_edges()
                    .into_iter()
                    .filter(|&(u, _, _)| label[u] == c)
                    .map(|(u, v, w)| (index[u], index[v], w)),
            )
            .unwrap()
        };
        let (gc, hc) = (induced(g), induced(h));
        if !hc.is_connected() {
            return f64::INFINITY;
        }
        worst = worst.max(kappa(&gc, &hc));
    }
    worst
}

fn replay(st: &mut SparsifierState, stream: &dysparse_core::UpdateStream) -> (UpdateReport, Vec<EventRecord>) {
    let mut records = Vec::new();
    let report = st
        .replay_stream_with(stream, |r| records.push(r.clone()))
        .expect("replay");
    (report, records)
}

fn ac1() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xac1);
    let (mut reaching, mut violations, mut worst_gap) = (0usize, 0usize, f64::NEG_INFINITY);
    for seed in 0..50u64 {
        let n = rng.random_range(20..=200);
        let extra = rng.random_range(0..=2 * n);
        let g = random_connected(n, extra, WeightRange::new(0.1, 10.0), seed);
        let oracle = ResistanceOracle::new(&g.laplacian()).unwrap();
        let cfg = WalkConfig::new(1e18, 100, 16, seed).unwrap();
        for qi in 0..100u64 {
            let p = rng.random_range(0..n);
            let q = (p + rng.random_range(1..n)) % n;
            let v = nbrw_reach(&g, p, q, 1.0, &cfg, qi).unwrap();
            if let Some(est) = v.best_estimate {
                reaching += 1;
                let gap = oracle.resistance(p, q) - est;
                worst_gap = worst_gap.max(gap);
                if gap > 1e-9 {
                    violations += 1;
                }
            }
        }
    }
    let (mut tree_hits, mut tree_err): (usize, f64) = (0, 0.0);
    for seed in 0..10u64 {
        let n = rng.random_range(20..=200);
        let t = random_tree(n, WeightRange::new(0.1, 10.0), 500 + seed);
        let oracle = ResistanceOracle::new(&t.laplacian()).unwrap();
        let cfg = WalkConfig::new(1e18, 100, 16, seed).unwrap();
        for qi in 0..100u64 {
            let p = rng.random_range(0..n);
            let q = (p + rng.random_range(1..n)) % n;
            if let Some(est) = nbrw_reach(&t, p, q, 1.0, &cfg, qi).unwrap().best_estimate {
                tree_hits += 1;
                let exact = oracle.resistance(p, q);
                tree_err = tree_err.max((est - exact).abs() / exact.max(1.0));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = violations == 0 && reaching > 0 && tree_hits > 0 && tree_err <= 1e-12 && elapsed.as_secs() <= 60;
    Check::new(
        "AC1",
        "oracle upper bound",
        pass,
        format!(
            "{reaching} reaching queries, {violations} below R_eff - 1e-9 (max R_eff - est = {worst_gap:.2e}); \
             trees: {tree_hits} hits, max rel err {tree_err:.1e}; {}",
            secs(elapsed)
        ),
    )
}

fn ac2() -> Check {
    let start = Instant::now();
    let triangle = DynamicGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
    let path = DynamicGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
    let t = commute_time_estimate(&triangle, 0, 1, 100_000, 21).unwrap();
    let p = commute_time_estimate(&path, 0, 2, 100_000, 22).unwrap();
    let (et, ep) = ((t - 4.0).abs() / 4.0, (p - 8.0).abs() / 8.0);
    let elapsed = start.elapsed();
    Check::new(
        "AC2",
        "commute time",
        et <= 0.05 && ep <= 0.05 && elapsed.as_secs() <= 30,
        format!(
            "triangle {t:.4} (4.0, err {:.2}%), path {p:.4} (8.0, err {:.2}%); {}",
            100.0 * et,
            100.0 * ep,
            secs(elapsed)
        ),
    )
}

fn ac3() -> Check {
    let mut ratios = Vec::new();
    for seed in 0..10u64 {
        let h = random_connected(20, 25, WeightRange::new(0.1, 10.0), 300 + seed);
        let s = DenseSpectrum::new(&h.laplacian()).unwrap();
        let ev = s.eigenvalues();
        let (p, q) = (0, 10 + seed as usize % 10);
        let gap = ev.as_slice().windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let w = 0.05 * gap;
        let delta = eigen_perturbation(&s, p, q, 1.0);
        let i = (0..20).max_by(|&a, &b| delta[a].total_cmp(&delta[b])).unwrap();
        let err = |w: f64| {
            let mut hp = h.clone();
            hp.insert_edge(p, q, w).unwrap();
            let actual = DenseSpectrum::new(&hp.laplacian()).unwrap();
            (actual.eigenvalues()[i] - (ev[i] + w * delta[i])).abs()
        };
        ratios.push(err(w) / err(w / 2.0));
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    Check::new(
        "AC3",
        "first-order perturbation",
        ratios.iter().all(|r| (3.0..=5.0).contains(r)),
        format!("error ratio w/(w/2) over 10 graphs in [{lo:.3}, {hi:.3}]"),
    )
}

fn ac4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac4);
    let (mut worst_min, mut worst_ratio): (f64, f64) = (0.0, 0.0);
    let mut pass = true;
    for seed in 0..50u64 {
        let n = rng.random_range(8..=40);
        let extra = rng.random_range(n / 2..=2 * n);
        let g = with_pendant(&random_connected(n, extra, WeightRange::new(0.1, 10.0), 700 + seed), 0, 1.0);
        let h = build_initial_sparsifier(&g, rng.random_range(0.0..0.4), seed).unwrap();
        let lambda = generalized_eigenvalues_dense(&g.laplacian(), &h.laplacian()).unwrap();
        let (lmin, lmax) = (lambda[0], lambda[lambda.len() - 1]);
        worst_min = worst_min.max((lmin - 1.0).abs());
        let (rg, rh) = (
            ResistanceOracle::new(&g.laplacian()).unwrap(),
            ResistanceOracle::new(&h.laplacian()).unwrap(),
        );
        let m = g.vertex_count();
        let mut ratio: f64 = 0.0;
        for p in 0..m {
            for q in p + 1..m {
                ratio = ratio.max(rh.resistance(p, q) / rg.resistance(p, q));
            }
        }
        worst_ratio = worst_ratio.max(ratio / lmax);
        pass &= (lmin - 1.0).abs() <= 1e-6 && ratio <= lmax * (1.0 + 1e-6);
    }
    Check::new(
        "AC4",
        "pencil bounds",
        pass,
        format!("50 instances: max |lambda_min - 1| = {worst_min:.1e}, max (R_H/R_G)/lambda_max = {worst_ratio:.6}"),
    )
}

/// Walk settings shared by the desk-scale runs.
fn desk_config(policy: InsertionPolicy) -> SparsifierConfig {
    SparsifierConfig {
        walk: WalkConfig::new(1.0, 100, 32, 11).unwrap(),
        policy,
        mode: UpdateMode::Batched,
        ..Default::default()
    }
}

fn calibrated(g: &DynamicGraph, h: &DynamicGraph, policy: InsertionPolicy) -> SparsifierState {
    let mut cfg = desk_config(policy);
    let mut st = SparsifierState::new(g.clone(), h.clone(), cfg).unwrap();
    cfg.walk.distortion_threshold = calibrate_threshold(&st, 0.05, DEFAULT_RHO).unwrap();
    st.set_config(cfg).unwrap();
    st
}

/// Post-insertion state of the filtered desk-scale run, handed to AC6.
struct DeskState {
    st: SparsifierState,
    kappa_after: f64,
}

fn ac5(audit: &mut Audit) -> (Check, DeskState) {
    let start = Instant::now();
    let g = triangulated_mesh(100, 100, WeightRange::UNIT, 1);
    let h = build_initial_sparsifier(&g, 0.1, 0).unwrap();
    let d0 = h.density();
    let k0 = kappa(&g, &h);
    let stream = generate_updates(
        &g,
        &StreamParams {
            insert_frac: 0.25,
            batches: 10,
            seed: 3,
            locality: InsertionLocality::Mixed {
                max_hops: 4,
                long_range: 0.1,
            },
            ..Default::default()
        },
    )
    .unwrap();

    let mut filt = calibrated(&g, &h, InsertionPolicy::Filter);
    let k_thresh = filt.config().walk.distortion_threshold;
    let (rf, recs) = replay(&mut filt, &stream);
    audit.record("AC5 filter", filt.config(), &recs);
    let mut keep = calibrated(&g, &h, InsertionPolicy::KeepAll);
    let (rk, _) = replay(&mut keep, &stream);
    let mut frozen = calibrated(&g, &h, InsertionPolicy::Freeze);
    let (_, recs) = replay(&mut frozen, &stream);
    audit.record("AC5 frozen", frozen.config(), &recs);

    let k_frozen = kappa(frozen.graph(), frozen.sparsifier());
    let k_filt = kappa(filt.graph(), filt.sparsifier());
    let max_filt = rf.batches.iter().map(|b| b.density_h).fold(d0, f64::max);
    let keep_final = rk.density_h;
    let a = keep_final >= 3.0 * d0 && max_filt <= 2.0 * d0;
    let b = k_frozen >= 2.0 * k0 && k_filt <= 3.0 * k0;
    let c = rf.batches.iter().zip(&rk.batches).all(|(f, k)| f.density_h < k.density_h);
    let elapsed = start.elapsed();
    let detail = format!(
        "n={} d_H0={d0:.4} kappa0={k0:.1} K={k_thresh:.2} | (a) no-filter {keep_final:.4} ({:.2}x), filtered max {max_filt:.4} ({:.2}x) | \
         (b) frozen kappa {k_frozen:.1} ({:.2}x), filtered kappa {k_filt:.1} ({:.2}x) | (c) filtered < no-filter every batch: {c} | {}",
        g.vertex_count(),
        keep_final / d0,
        max_filt / d0,
        k_frozen / k0,
        k_filt / k0,
        secs(elapsed)
    );
    let check = Check::new(
        "AC5",
        "filtering trends",
        a && b && c && elapsed.as_secs() <= 300,
        detail,
    );
    (
        check,
        DeskState {
            st: filt,
            kappa_after: k_filt,
        },
    )
}

fn ac6(desk: DeskState, audit: &mut Audit) -> Check {
    let DeskState { mut st, kappa_after } = desk;
    let stream = generate_updates(
        st.graph(),
        &StreamParams {
            delete_frac: 0.01,
            batches: 10,
            seed: 4,
            ..Default::default()
        },
    )
    .unwrap();
    let (report, recs) = replay(&mut st, &stream);
    audit.record("AC6 deletions", st.config(), &recs);
    let (g, h) = (st.graph(), st.sparsifier());
    let isolated = (0..g.vertex_count())
        .filter(|&v| g.degree(v) > 0 && h.degree(v) == 0)
        .count();
    let subgraph = check_subgraph(g, h).is_ok();
    let k_post = kappa_by_component(g, h);
    let t = report.total();
    let pass = isolated == 0 && subgraph && k_post <= 1.5 * kappa_after;
    Check::new(
        "AC6",
        "decremental safety",
        pass,
        format!(
            "{} deletions ({} in H: {} paths, {} fallbacks); H-isolated vertices {isolated}; H subset of G: {subgraph}; \
             kappa {kappa_after:.1} -> {k_post:.1} ({:.3}x)",
            t.deletions,
            t.deletions_in_h,
            t.paths_recovered,
            t.fallbacks,
            k_post / kappa_after
        ),
    )
}

fn pcg_iterations(g: &DynamicGraph, h: &DynamicGraph) -> (usize, bool) {
    let m = build_preconditioner(h).unwrap();
    let b = random_rhs(g.vertex_count(), 9);
    let r = pcg_solve(&g.laplacian(), &b, &m, 1e-8, 20_000).unwrap();
    (r.iterations, r.converged)
}

fn ac7(audit: &mut Audit) -> Check {
    let start = Instant::now();
    let g = grid(64, 64, WeightRange::new(0.1, 10.0), 1);
    let h = build_initial_sparsifier(&g, 0.1, 0).unwrap();
    let stream = generate_updates(
        &g,
        &StreamParams {
            insert_frac: 0.24,
            batches: 10,
            seed: 3,
            ..Default::default()
        },
    )
    .unwrap();
    let mut st = calibrated(&g, &h, InsertionPolicy::Filter);
    let (_, recs) = replay(&mut st, &stream);
    audit.record("AC7 filter", st.config(), &recs);
    let (i0, c0) = pcg_iterations(&g, &h);
    let (stale, c1) = pcg_iterations(st.graph(), &h);
    let (upd, c2) = pcg_iterations(st.graph(), st.sparsifier());
    let elapsed = start.elapsed();
    let pass = c0 && c1 && c2 && stale as f64 >= 2.0 * i0 as f64 && upd as f64 <= 1.5 * i0 as f64 && elapsed.as_secs() <= 300;
    Check::new(
        "AC7",
        "PCG iterations",
        pass,
        format!(
            "n={} d_H {:.4} -> {:.4}; iterations initial {i0}, stale {stale} ({:.2}x), updated {upd} ({:.2}x); {}",
            g.vertex_count(),
            h.density(),
            st.sparsifier().density(),
            stale as f64 / i0 as f64,
            upd as f64 / i0 as f64,
            secs(elapsed)
        ),
    )
}

fn ac8(audit: &Audit) -> Check {
    let pass = audit.runs.iter().all(|r| r.max_event_steps <= r.bound);
    let detail = audit
        .runs
        .iter()
        .map(|r| format!("{}: {} events, max {} <= {}", r.label, r.events, r.max_event_steps, r.bound))
        .collect::<Vec<_>>()
        .join("; ");
    Check::new("AC8", "per-event walker steps", pass && !audit.runs.is_empty(), detail)
}

fn cli(args: &[&str], dir: &Path, threads: Option<usize>) -> Result<(), String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dysparse"));
    cmd.args(args).current_dir(dir);
    if let Some(t) = threads {
        cmd.env("DYSPARSE_THREADS", t.to_string());
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

fn ac9(audit: &mut Audit) -> Check {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let g = triangulated_mesh(30, 30, WeightRange::new(0.5, 2.0), 5);
    let h = build_initial_sparsifier(&g, 0.1, 5).unwrap();
    let stream = generate_updates(
        &g,
        &StreamParams {
            insert_frac: 0.25,
            delete_frac: 0.01,
            batches: 5,
            seed: 6,
            locality: InsertionLocality::WithinHops(5),
        },
    )
    .unwrap();
    save_matrix_market(&g, d.join("g.mtx")).unwrap();
    save_matrix_market(&h, d.join("h.mtx")).unwrap();
    save_stream(&stream, d.join("s.txt")).unwrap();

    let base = ["replay", "g.mtx", "h.mtx", "s.txt", "--auto-K", "--seed", "9", "--eval-every", "1"];
    let run = |out: &str, threads: Option<usize>| {
        let mut args = base.to_vec();
        args.extend(["--out", out, "--final-sparsifier"]);
        let h_out = format!("{out}.h.mtx");
        args.push(&h_out);
        cli(&args, d, threads)
    };
    let mut notes = Vec::new();
    let mut pass = true;
    for (out, threads) in [("a.csv", Some(1)), ("b.csv", Some(1)), ("c.csv", Some(4))] {
        if let Err(e) = run(out, threads) {
            notes.push(format!("replay {out} failed: {e}"));
            pass = false;
        }
    }
    if let Err(e) = cli(&["rerun", "a.csv.manifest.json", "--out", "r.csv"], d, None) {
        notes.push(format!("rerun failed: {e}"));
        pass = false;
    }
    let read = |f: &str| std::fs::read(d.join(f)).unwrap_or_default();
    let a = read("a.csv");
    let same_twice = !a.is_empty() && a == read("b.csv");
    let same_rerun = a == read("r.csv");
    let same_threads = a == read("c.csv") && read("a.csv.h.mtx") == read("c.csv.h.mtx");

    let records = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut st = calibrated(&g, &h, InsertionPolicy::Filter);
            let (_, recs) = replay(&mut st, &stream);
            (st.config().to_owned(), recs)
        })
    };
    let (cfg, one) = records(1);
    let (_, many) = records(4);
    audit.record("AC9 replay", &cfg, &one);
    let same_verdicts = one == many;
    pass &= same_twice && same_rerun && same_threads && same_verdicts;
    notes.insert(
        0,
        format!(
            "CSV twice identical: {same_twice}; rerun from manifest identical: {same_rerun}; \
             1 vs 4 threads CSV and final H identical: {same_threads}; {} event verdicts 1 vs 4 workers identical: {same_verdicts}",
            one.len()
        ),
    );
    Check::new("AC9", "determinism", pass, notes.join("; "))
}

/// Unit-weight 26-vertex walkthrough graph: `H0` is a spanning tree, `G0`
/// adds a few off-tree edges.
fn case_study() -> (DynamicGraph, DynamicGraph) {
    let tree = [
        (25, 20), (20, 19), (20, 22), (22, 17), (22, 21), (17, 16), (16, 15), (15, 14),
        (14, 13), (13, 12), (19, 18), (18, 11), (11, 10), (10, 9), (9, 8), (8, 7), (7, 6),
        (6, 5), (5, 4), (4, 3), (3, 2), (2, 1), (1, 0), (12, 23), (23, 24),
    ];
    let off_tree = [(24, 25, 1.0), (16, 21, 1.0), (15, 23, 0.5), (23, 17, 1.0), (0, 5, 1.0), (3, 8, 1.0), (13, 24, 1.0)];
    let h = DynamicGraph::from_edges(26, tree.iter().map(|&(u, v)| (u, v, 1.0))).unwrap();
    let g = DynamicGraph::from_edges(26, tree.iter().map(|&(u, v)| (u, v, 1.0)).chain(off_tree)).unwrap();
    (g, h)
}

fn ac10() -> Check {
    let (g, h) = case_study();
    let cfg = SparsifierConfig {
        walk: WalkConfig::new(4.0, 4, 16, 0).unwrap(),
        ..Default::default()
    };
    let mut st = SparsifierState::new(g, h, cfg).unwrap();
    let far = st.apply_insertion(25, 9, 1.0).unwrap();
    let near = st.apply_insertion(25, 17, 1.0).unwrap();
    let g_only = st.apply_deletion(24, 25).unwrap();
    let before = st.sparsifier().clone();
    let rec = st.apply_deletion(16, 17).unwrap();
    let added: Vec<(usize, usize)> = st
        .sparsifier()
        .sorted_edges()
        .into_iter()
        .filter(|&(u, v, _)| !before.has_edge(u, v))
        .map(|(u, v, _)| (u, v))
        .collect();
    let ok_far = far.decision == InsertionDecision::Kept;
    let ok_near = near.decision == InsertionDecision::Pruned;
    let ok_g_only = g_only.kind == DeletionKind::GOnly;
    let ok_rec = rec.kind == DeletionKind::PathRecovered(1) && added == vec![(16, 21)];
    Check::new(
        "AC10",
        "case-study fixture",
        ok_far && ok_near && ok_g_only && ok_rec && st.check_invariants().is_ok(),
        format!(
            "(25,9) {:?}; (25,17) {:?} at estimate {:?}; (24,25) {:?}; (16,17) {:?} adding {:?} via {:?}",
            far.decision,
            near.decision,
            near.verdict.and_then(|v| v.best_estimate),
            g_only.kind,
            rec.kind,
            added,
            rec.path.map(|p| p.vertices)
        ),
    )
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    // `cargo test -- --list` and friends probe harness-less targets.
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut audit = Audit::default();
    let mut checks = vec![ac1(), ac2(), ac3(), ac4()];
    let (c5, desk) = ac5(&mut audit);
    checks.push(c5);
    checks.push(ac6(desk, &mut audit));
    checks.push(ac7(&mut audit));
    let c9 = ac9(&mut audit);
    let c10 = ac10();
    checks.push(ac8(&audit));
    checks.push(c9);
    checks.push(c10);

    let mut failed = 0;
    for c in &checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {} {}: {}", c.id, c.title, c.detail);
        failed += usize::from(!c.pass);
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
