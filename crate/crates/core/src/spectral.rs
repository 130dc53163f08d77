//! Effective resistance, relative condition numbers and related spectral
//! quantities.
//!
//! Dense routines (pseudo-inverse, eigendecomposition, dense pencil solve)
//! are oracles for small graphs and refuse inputs above a vertex cap. The
//! iterative condition-number estimate scales to large graphs: it runs
//! Lanczos on `L_H⁺ L_G` in the `L_H` inner product, restricted to zero-mean
//! vectors.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::factor::{center, FactorLimits};
use crate::graph::{DynamicGraph, VertexId};
use crate::laplacian::SparseLaplacian;
use crate::solver::{preconditioner_from_laplacian, random_rhs, Preconditioner, SolverError};

/// Largest graph the dense oracles accept by default.
pub const DEFAULT_DENSE_CAP: usize = 5000;

pub const DEFAULT_LANCZOS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("{n} vertices exceeds the dense cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("graph is disconnected ({0} components)")]
    Disconnected(usize),

    #[error("invalid resistance query ({p}, {q}) on {n} vertices")]
    InvalidQuery { p: VertexId, q: VertexId, n: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error(
        "condition number did not converge in {iterations} iterations \
         (lambda_min in [{lambda_min_bracket:?}], lambda_max >= {lambda_max_lower})"
    )]
    NotConverged {
        iterations: usize,
        lambda_max_lower: f64,
        lambda_min_bracket: (f64, f64),
    },

    #[error("dense factorization failed: matrix is not positive definite")]
    NotPositiveDefinite,

    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// The pair `(p, q)` behind the probe vector `b_pq = e_p − e_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResistanceQuery {
    pub p: VertexId,
    pub q: VertexId,
}

impl ResistanceQuery {
    pub fn new(p: VertexId, q: VertexId, n: usize) -> Result<Self, SpectralError> {
        if p == q || p >= n || q >= n {
            return Err(SpectralError::InvalidQuery { p, q, n });
        }
        Ok(Self { p, q })
    }

    pub fn probe(&self, n: usize) -> DVector<f64> {
        let mut b = DVector::zeros(n);
        b[self.p] = 1.0;
        b[self.q] = -1.0;
        b
    }
}

fn check_cap(n: usize, cap: usize) -> Result<(), SpectralError> {
    if n > cap {
        Err(SpectralError::TooLarge { n, cap })
    } else {
        Ok(())
    }
}

fn check_connected(l: &SparseLaplacian) -> Result<(), SpectralError> {
    let (k, _) = l.components();
    if l.dim() > 1 && k != 1 {
        return Err(SpectralError::Disconnected(k));
    }
    Ok(())
}

/// Dense `L⁺` of a connected Laplacian, via `L⁺ = (L + J/n)⁻¹ − J/n`.
pub fn pseudo_inverse(l: &SparseLaplacian) -> Result<DMatrix<f64>, SpectralError> {
    pseudo_inverse_capped(l, DEFAULT_DENSE_CAP)
}

pub fn pseudo_inverse_capped(l: &SparseLaplacian, cap: usize) -> Result<DMatrix<f64>, SpectralError> {
    let n = l.dim();
    check_cap(n, cap)?;
    check_connected(l)?;
    let j = 1.0 / n as f64;
    let shifted = l.to_dense().add_scalar(j);
    let chol = Cholesky::new(shifted).ok_or(SpectralError::NotPositiveDefinite)?;
    Ok(chol.inverse().add_scalar(-j))
}

/// `b_pqᵀ L⁺ b_pq` on a connected graph.
pub fn effective_resistance_exact(
    l: &SparseLaplacian,
    query: ResistanceQuery,
) -> Result<f64, SpectralError> {
    let n = l.dim();
    ResistanceQuery::new(query.p, query.q, n)?;
    let pinv = pseudo_inverse(l)?;
    Ok(resistance_from_pinv(&pinv, query))
}

fn resistance_from_pinv(pinv: &DMatrix<f64>, q: ResistanceQuery) -> f64 {
    pinv[(q.p, q.p)] + pinv[(q.q, q.q)] - 2.0 * pinv[(q.p, q.q)]
}

/// All-pairs effective resistance from one dense pseudo-inverse.
#[derive(Debug, Clone)]
pub struct ResistanceOracle {
    pinv: DMatrix<f64>,
}

impl ResistanceOracle {
    pub fn new(l: &SparseLaplacian) -> Result<Self, SpectralError> {
        Ok(Self {
            pinv: pseudo_inverse(l)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.pinv.nrows()
    }

    pub fn resistance(&self, p: VertexId, q: VertexId) -> f64 {
        if p == q {
            return 0.0;
        }
        resistance_from_pinv(&self.pinv, ResistanceQuery { p, q })
    }

    pub fn pseudo_inverse(&self) -> &DMatrix<f64> {
        &self.pinv
    }
}

/// Eigenpairs of a Laplacian in ascending order plus its pseudo-inverse.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    pinv: DMatrix<f64>,
}

impl DenseSpectrum {
    pub fn new(l: &SparseLaplacian) -> Result<Self, SpectralError> {
        Self::with_cap(l, DEFAULT_DENSE_CAP)
    }

    pub fn with_cap(l: &SparseLaplacian, cap: usize) -> Result<Self, SpectralError> {
        let n = l.dim();
        check_cap(n, cap)?;
        let pinv = pseudo_inverse_capped(l, cap)?;
        let eig = SymmetricEigen::new(l.to_dense());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut eigenvectors = DMatrix::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            eigenvectors.set_column(k, &eig.eigenvectors.column(i));
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
            pinv,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, matching `eigenvalues`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn pseudo_inverse(&self) -> &DMatrix<f64> {
        &self.pinv
    }

    /// Effective resistance as the quadratic form in `L⁺`.
    pub fn resistance(&self, q: ResistanceQuery) -> f64 {
        resistance_from_pinv(&self.pinv, q)
    }

    /// Effective resistance as `Σ_{i≥2} (u_iᵀ b)² / λ_i`.
    pub fn resistance_eigensum(&self, q: ResistanceQuery) -> f64 {
        (1..self.dim())
            .map(|i| {
                let u = self.eigenvectors.column(i);
                (u[q.p] - u[q.q]).powi(2) / self.eigenvalues[i]
            })
            .sum()
    }
}

/// `Δ = w_pq · R`.
pub fn spectral_distortion(weight: f64, resistance: f64) -> f64 {
    weight * resistance
}

/// First-order eigenvalue shifts `δλ_i = w′ (u_iᵀ b_pq)²` from adding an
/// edge `(p, q, w′)` to the graph behind `spectrum`, in eigenvalue order.
pub fn eigen_perturbation(spectrum: &DenseSpectrum, p: VertexId, q: VertexId, weight: f64) -> Vec<f64> {
    (0..spectrum.dim())
        .map(|i| {
            let u = spectrum.eigenvectors.column(i);
            weight * (u[p] - u[q]).powi(2)
        })
        .collect()
}

/// Columns `u_i / √λ_i` for `i = 2..=k`.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    columns: DMatrix<f64>,
}

impl EigenBasis {
    /// `k` is clamped to `2..=n`.
    pub fn new(spectrum: &DenseSpectrum, k: usize) -> Self {
        let n = spectrum.dim();
        let k = k.clamp(2.min(n), n);
        let cols = k.saturating_sub(1);
        let mut columns = DMatrix::zeros(n, cols);
        for c in 0..cols {
            let i = c + 1;
            let scale = 1.0 / spectrum.eigenvalues[i].sqrt();
            columns.set_column(c, &(spectrum.eigenvectors.column(i) * scale));
        }
        Self { columns }
    }

    pub fn len(&self) -> usize {
        self.columns.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.ncols() == 0
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    /// `w · ‖U_Kᵀ b_pq‖²`; equals `w · R_eff` when `K = n`.
    pub fn distortion(&self, p: VertexId, q: VertexId, weight: f64) -> f64 {
        let s: f64 = (0..self.len())
            .map(|c| (self.columns[(p, c)] - self.columns[(q, c)]).powi(2))
            .sum();
        weight * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionMethod {
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionEstimate {
    pub kappa: f64,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub method: ConditionMethod,
    pub iterations_used: usize,
}

impl ConditionEstimate {
    fn new(lambda_min: f64, lambda_max: f64, method: ConditionMethod, iterations_used: usize) -> Self {
        Self {
            kappa: lambda_max / lambda_min,
            lambda_max,
            lambda_min,
            method,
            iterations_used,
        }
    }
}

fn check_pencil(l_g: &SparseLaplacian, l_h: &SparseLaplacian) -> Result<(), SpectralError> {
    if l_g.dim() != l_h.dim() {
        return Err(SpectralError::DimensionMismatch(l_g.dim(), l_h.dim()));
    }
    check_connected(l_g)?;
    check_connected(l_h)?;
    Ok(())
}

/// All generalized eigenvalues of `(L_G, L_H)` on the complement of the
/// constant vector, ascending.
///
/// Both Laplacians annihilate the constant vector, so the pencil restricted
/// to its complement is equivalent to the one obtained by deleting the last
/// row and column (grounding a vertex). That reduced `L_H` is positive
/// definite; with `L_H = C Cᵀ` the eigenvalues are those of `C⁻¹ L_G C⁻ᵀ`.
pub fn generalized_eigenvalues_dense(
    l_g: &SparseLaplacian,
    l_h: &SparseLaplacian,
) -> Result<Vec<f64>, SpectralError> {
    check_pencil(l_g, l_h)?;
    let n = l_g.dim();
    check_cap(n, DEFAULT_DENSE_CAP)?;
    if n < 2 {
        return Ok(Vec::new());
    }
    let r = n - 1;
    let a = l_g.to_dense().view((0, 0), (r, r)).into_owned();
    let b = l_h.to_dense().view((0, 0), (r, r)).into_owned();
    let c = Cholesky::new(b)
        .ok_or(SpectralError::NotPositiveDefinite)?
        .l();
    let x = c
        .solve_lower_triangular(&a)
        .ok_or(SpectralError::NotPositiveDefinite)?;
    let m = c
        .solve_lower_triangular(&x.transpose())
        .ok_or(SpectralError::NotPositiveDefinite)?;
    let m = (&m + m.transpose()) * 0.5;
    let mut vals: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// `κ(L_G, L_H)`. `tol` and `max_iter` apply to the iterative method only.
pub fn condition_number(
    l_g: &SparseLaplacian,
    l_h: &SparseLaplacian,
    method: ConditionMethod,
    tol: f64,
    max_iter: usize,
) -> Result<ConditionEstimate, SpectralError> {
    match method {
        ConditionMethod::Dense => {
            let vals = generalized_eigenvalues_dense(l_g, l_h)?;
            match (vals.first(), vals.last()) {
                (Some(&lo), Some(&hi)) => Ok(ConditionEstimate::new(lo, hi, method, 0)),
                _ => Ok(ConditionEstimate::new(1.0, 1.0, method, 0)),
            }
        }
        ConditionMethod::Iterative => {
            check_pencil(l_g, l_h)?;
            let m = preconditioner_from_laplacian(l_h, FactorLimits::default())?;
            lanczos_condition(l_g, l_h, &m, tol, max_iter)
        }
    }
}

/// Iterative `κ(L_G, L_H)` with a prebuilt solver for `L_H`.
///
/// Lanczos on `L_H⁺ L_G`, which is self-adjoint in the `L_H` inner product,
/// with full reorthogonalization. A Ritz value `θ` with residual norm `ρ`
/// (in the `L_H⁻¹` norm) lies within `ρ` of a true eigenvalue, so the run
/// stops once both extreme residuals fall below `tol · θ`.
pub fn lanczos_condition(
    l_g: &SparseLaplacian,
    l_h: &SparseLaplacian,
    solve_h: &Preconditioner,
    tol: f64,
    max_iter: usize,
) -> Result<ConditionEstimate, SpectralError> {
    let n = l_g.dim();
    if l_h.dim() != n || solve_h.dim() != n {
        return Err(SpectralError::DimensionMismatch(n, l_h.dim()));
    }
    if n < 2 {
        return Ok(ConditionEstimate::new(1.0, 1.0, ConditionMethod::Iterative, 0));
    }
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };

    let mut q = random_rhs(n, 0x6c61_6e63_7a6f_7321);
    let mut bq = l_h.mul_vec(&q);
    let nrm = dot(&q, &bq).sqrt();
    q.iter_mut().for_each(|v| *v /= nrm);
    bq.iter_mut().for_each(|v| *v /= nrm);

    let limit = max_iter.min(n - 1).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut b_basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last: Option<(f64, f64, f64, f64)> = None;

    for j in 0..limit {
        let aq = l_g.mul_vec(&q);
        let mut w = solve_h.apply(&aq);
        let alpha = dot(&q, &aq);
        for (wi, qi) in w.iter_mut().zip(&q) {
            *wi -= alpha * qi;
        }
        if let (Some(prev), Some(&beta)) = (basis.last(), betas.last()) {
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= beta * pi;
            }
        }
        basis.push(std::mem::take(&mut q));
        b_basis.push(std::mem::take(&mut bq));
        alphas.push(alpha);
        for _ in 0..2 {
            for (v, bv) in basis.iter().zip(&b_basis) {
                let c = dot(&w, bv);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
        }
        center(&mut w);
        let bw = l_h.mul_vec(&w);
        let beta = dot(&w, &bw).max(0.0).sqrt();

        let k = alphas.len();
        let (theta_min, theta_max, res_min, res_max) = ritz_extremes(&alphas, &betas, beta);
        last = Some((theta_min, theta_max, res_min, res_max));
        let scale = alphas.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let exhausted = beta <= 1e-12 * scale || k == n - 1;
        let converged = res_min <= tol * theta_min && res_max <= tol * theta_max;
        if exhausted || converged {
            return Ok(ConditionEstimate::new(
                theta_min,
                theta_max,
                ConditionMethod::Iterative,
                j + 1,
            ));
        }
        betas.push(beta);
        q = w.iter().map(|v| v / beta).collect();
        bq = bw.iter().map(|v| v / beta).collect();
    }

    let (theta_min, theta_max, res_min, _) = last.expect("at least one iteration");
    Err(SpectralError::NotConverged {
        iterations: limit,
        lambda_max_lower: theta_max,
        lambda_min_bracket: ((theta_min - res_min).max(0.0), theta_min),
    })
}

/// Extreme Ritz values of the Lanczos tridiagonal and their residual norms
/// `|β_k s_k|`.
fn ritz_extremes(alphas: &[f64], betas: &[f64], beta_next: f64) -> (f64, f64, f64, f64) {
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (mut imin, mut imax) = (0, 0);
    for i in 0..k {
        if eig.eigenvalues[i] < eig.eigenvalues[imin] {
            imin = i;
        }
        if eig.eigenvalues[i] > eig.eigenvalues[imax] {
            imax = i;
        }
    }
    let res = |i: usize| (beta_next * eig.eigenvectors[(k - 1, i)]).abs();
    (eig.eigenvalues[imin], eig.eigenvalues[imax], res(imin), res(imax))
}

/// Monte Carlo mean of the round-trip time `p → q → p` of the plain
/// weighted random walk (backtracking allowed).
pub fn commute_time_estimate(
    g: &DynamicGraph,
    p: VertexId,
    q: VertexId,
    trials: usize,
    seed: u64,
) -> Result<f64, SpectralError> {
    let n = g.vertex_count();
    ResistanceQuery::new(p, q, n)?;
    let (_, labels) = g.components();
    if labels[p] != labels[q] {
        return Err(SpectralError::Disconnected(g.components().0));
    }
    let trials = trials.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total: u64 = 0;
    for _ in 0..trials {
        total += hitting_steps(g, p, q, &mut rng) + hitting_steps(g, q, p, &mut rng);
    }
    Ok(total as f64 / trials as f64)
}

fn hitting_steps<R: Rng>(g: &DynamicGraph, from: VertexId, to: VertexId, rng: &mut R) -> u64 {
    let mut at = from;
    let mut steps = 0;
    while at != to {
        let nbrs = g.neighbors(at);
        let total = g.weighted_degree(at);
        let mut x = rng.random::<f64>() * total;
        let mut next = nbrs[nbrs.len() - 1].0;
        for &(v, w) in nbrs {
            if x < w {
                next = v;
                break;
            }
            x -= w;
        }
        at = next;
        steps += 1;
    }
    steps
}
