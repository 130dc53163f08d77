//! Preconditioned conjugate gradients for `L_G x = b` with a sparsifier
//! Laplacian `L_H` as the preconditioner.
//!
//! Laplacian systems are singular but consistent on the zero-mean subspace;
//! right-hand sides and iterates are projected onto it throughout.

use log::debug;
use thiserror::Error;

use crate::factor::{center, FactorError, FactorLimits, LaplacianFactor};
use crate::graph::DynamicGraph;
use crate::laplacian::SparseLaplacian;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
const INNER_CG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("preconditioner graph is disconnected ({0} components)")]
    Disconnected(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("factorization failed: {0}")]
    Factor(FactorError),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Applies `y ↦ L_H⁺ y` on zero-mean vectors.
#[derive(Debug, Clone)]
pub enum Preconditioner {
    /// No preconditioning (projection onto the zero-mean subspace only).
    Identity(usize),
    /// Exact sparse elimination of `L_H`.
    Factor(LaplacianFactor),
    /// Jacobi-preconditioned CG on `L_H`, for graphs whose elimination fills
    /// in past the limits.
    InnerCg {
        laplacian: SparseLaplacian,
        inv_diag: Vec<f64>,
        tol: f64,
    },
}

impl Preconditioner {
    pub fn dim(&self) -> usize {
        match self {
            Preconditioner::Identity(n) => *n,
            Preconditioner::Factor(f) => f.dim(),
            Preconditioner::InnerCg { laplacian, .. } => laplacian.dim(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Preconditioner::Factor(_))
    }

    /// Zero-mean solution of `L_H y = b - mean(b)`. A constant input maps to
    /// zero.
    pub fn apply(&self, b: &[f64]) -> Vec<f64> {
        match self {
            Preconditioner::Identity(_) => {
                let mut y = b.to_vec();
                center(&mut y);
                y
            }
            Preconditioner::Factor(f) => f.solve(b),
            Preconditioner::InnerCg {
                laplacian,
                inv_diag,
                tol,
            } => {
                let jacobi = |r: &[f64]| -> Vec<f64> {
                    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(a, d)| a * d).collect();
                    center(&mut z);
                    z
                };
                let n = laplacian.dim();
                pcg_core(laplacian, b, jacobi, *tol, 20 * n.max(10)).solution
            }
        }
    }
}

/// Builds the preconditioner for `h`: exact factorization when it fits the
/// default limits, inner CG otherwise.
pub fn build_preconditioner(h: &DynamicGraph) -> Result<Preconditioner, SolverError> {
    build_preconditioner_with_limits(h, FactorLimits::default())
}

pub fn build_preconditioner_with_limits(
    h: &DynamicGraph,
    limits: FactorLimits,
) -> Result<Preconditioner, SolverError> {
    preconditioner_from_laplacian(&h.laplacian(), limits)
}

pub fn preconditioner_from_laplacian(
    l_h: &SparseLaplacian,
    limits: FactorLimits,
) -> Result<Preconditioner, SolverError> {
    match LaplacianFactor::from_laplacian(l_h, limits) {
        Ok(f) => Ok(Preconditioner::Factor(f)),
        Err(FactorError::Disconnected(k)) => Err(SolverError::Disconnected(k)),
        Err(e @ (FactorError::FillLimit(_) | FactorError::DenseCore { .. })) => {
            debug!("falling back to inner CG: {e}");
            let laplacian = l_h.clone();
            let inv_diag = laplacian
                .diagonal()
                .into_iter()
                .map(|d| if d > 0.0 { 1.0 / d } else { 0.0 })
                .collect();
            Ok(Preconditioner::InnerCg {
                laplacian,
                inv_diag,
                tol: INNER_CG_TOLERANCE,
            })
        }
        Err(e) => Err(SolverError::Factor(e)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcgResult {
    /// Zero-mean approximate solution.
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `‖L x − b‖ / ‖b‖`, recomputed from scratch at exit.
    pub relative_residual: f64,
    pub converged: bool,
}

fn pcg_core<M>(a: &SparseLaplacian, b: &[f64], precond: M, tol: f64, max_iter: usize) -> PcgResult
where
    M: Fn(&[f64]) -> Vec<f64>,
{
    let n = a.dim();
    let mut rhs = b.to_vec();
    center(&mut rhs);
    let bnorm = norm(&rhs);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return PcgResult {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }

    let true_residual = |x: &[f64]| -> Vec<f64> {
        let ax = a.mul_vec(x);
        let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
        center(&mut r);
        r
    };

    let mut r = rhs.clone();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        a.mul_vec_into(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            break;
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        iterations += 1;
        if norm(&r) / bnorm <= tol {
            // confirm against the true residual; replace the recurrence's if they drifted
            r = true_residual(&x);
            if norm(&r) / bnorm <= tol {
                converged = true;
                break;
            }
        }
        z = precond(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    center(&mut x);
    let relative_residual = norm(&true_residual(&x)) / bnorm;
    PcgResult {
        solution: x,
        iterations,
        relative_residual,
        converged: converged && relative_residual <= tol,
    }
}

/// Solves `L_G x = b` by PCG with preconditioner `m`. Iterations count
/// products with `L_G`; preconditioner applications are not counted.
pub fn pcg_solve(
    l_g: &SparseLaplacian,
    b: &[f64],
    m: &Preconditioner,
    tol: f64,
    max_iter: usize,
) -> Result<PcgResult, SolverError> {
    let n = l_g.dim();
    for got in [b.len(), m.dim()] {
        if got != n {
            return Err(SolverError::DimensionMismatch { expected: n, got });
        }
    }
    Ok(pcg_core(l_g, b, |r| m.apply(r), tol, max_iter))
}

/// Seeded standard-normal right-hand side projected to zero mean.
pub fn random_rhs(n: usize, seed: u64) -> Vec<f64> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut b: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    center(&mut b);
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(r: usize, c: usize) -> DynamicGraph {
        let id = |i: usize, j: usize| i * c + j;
        let mut e = Vec::new();
        for i in 0..r {
            for j in 0..c {
                if i + 1 < r {
                    e.push((id(i, j), id(i + 1, j), 1.0));
                }
                if j + 1 < c {
                    e.push((id(i, j), id(i, j + 1), 1.0));
                }
            }
        }
        DynamicGraph::from_edges(r * c, e).unwrap()
    }

    #[test]
    fn two_vertex_apply() {
        let h = DynamicGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let m = build_preconditioner(&h).unwrap();
        assert_eq!(m.apply(&[1.0, -1.0]), vec![0.5, -0.5]);
    }

    #[test]
    fn constant_input_projects_to_zero() {
        let m = build_preconditioner(&grid(3, 3)).unwrap();
        assert!(m.apply(&[1.0; 9]).iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn disconnected_preconditioner_rejected() {
        let h = DynamicGraph::from_edges(3, [(0, 1, 1.0)]).unwrap();
        assert_eq!(build_preconditioner(&h).unwrap_err(), SolverError::Disconnected(2));
    }

    #[test]
    fn exact_preconditioner_converges_at_once() {
        let g = grid(10, 10);
        let m = build_preconditioner(&g).unwrap();
        let b = random_rhs(100, 3);
        let res = pcg_solve(&g.laplacian(), &b, &m, 1e-8, 100).unwrap();
        assert!(res.converged);
        assert!(res.iterations <= 2);
    }

    #[test]
    fn inner_cg_fallback_matches_factor() {
        let g = grid(8, 8);
        let tiny = FactorLimits {
            max_fill: 10,
            max_pivot_degree: 1,
        };
        let m = build_preconditioner_with_limits(&g, tiny).unwrap();
        assert!(!m.is_exact());
        let exact = build_preconditioner(&g).unwrap();
        let b = random_rhs(64, 1);
        let (y1, y2) = (m.apply(&b), exact.apply(&b));
        let err: f64 = y1.iter().zip(&y2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn max_iter_exhaustion_reports_unconverged() {
        let g = grid(16, 16);
        let b = random_rhs(256, 5);
        let res = pcg_solve(&g.laplacian(), &b, &Preconditioner::Identity(256), 1e-12, 3).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 3);
        assert!(res.relative_residual > 1e-12);
    }

    #[test]
    fn dimension_checks() {
        let g = grid(2, 2);
        let e = pcg_solve(&g.laplacian(), &[0.0; 3], &Preconditioner::Identity(4), 1e-8, 10);
        assert!(matches!(e, Err(SolverError::DimensionMismatch { .. })));
    }

    #[test]
    fn random_rhs_is_zero_mean_and_seeded() {
        let a = random_rhs(50, 9);
        assert!(a.iter().sum::<f64>().abs() < 1e-12);
        assert_eq!(a, random_rhs(50, 9));
        assert_ne!(a, random_rhs(50, 10));
    }
}
