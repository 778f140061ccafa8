//! Dense and block-iterative solvers for [`BlockSystem`].

use nalgebra::{DVector, SMatrix, SVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{BlockSystem, Moments};

pub const DEFAULT_DENSE_CAP: usize = 6000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Dense,
    BlockJacobi,
    BlockGaussSeidel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IterativeScheme {
    Jacobi,
    GaussSeidel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: SolveMethod,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
    pub unknowns: usize,
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SolverError {
    #[error("matrix is numerically singular (smallest pivot {pivot:.3e} < 1e-14 * {scale:.3e})")]
    SingularMatrix { pivot: f64, scale: f64 },
    #[error("{unknowns} unknowns exceed the dense solver cap of {cap}")]
    SizeCapExceeded { unknowns: usize, cap: usize },
    #[error("diagonal block {0} is numerically singular")]
    DiagonalBlockSingular(usize),
    #[error("iteration did not converge: residual {:.3e} after {} sweeps", report.relative_residual, report.iterations)]
    NotConverged { best: DVector<Complex64>, report: SolveReport },
    #[error("systems differ in shape ({0} vs {1} blocks)")]
    ShapeMismatch(usize, usize),
}

/// Method selection for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    /// Dense up to the cap, block Gauss–Seidel beyond.
    Auto,
    Dense,
    BlockJacobi,
    BlockGaussSeidel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub method: MethodChoice,
    pub tol: f64,
    pub max_iter: usize,
    pub dense_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { method: MethodChoice::Auto, tol: 1e-12, max_iter: 500, dense_cap: DEFAULT_DENSE_CAP }
    }
}

/// Partial-pivoted LU on the dense realization.
pub fn solve_dense<const N: usize>(sys: &BlockSystem<N>, cap: usize) -> Result<(Moments<N>, SolveReport), SolverError> {
    let unknowns = sys.n_unknowns();
    if unknowns > cap {
        return Err(SolverError::SizeCapExceeded { unknowns, cap });
    }
    let a = sys.to_dense();
    let scale = (0..a.nrows()).map(|r| a.row(r).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let lu = a.lu();
    let pivot = lu.u().diagonal().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if unknowns > 0 && !(pivot >= 1e-14 * scale && scale > 0.0) {
        return Err(SolverError::SingularMatrix { pivot, scale });
    }
    let x = lu.solve(&sys.stacked_source()).ok_or(SolverError::SingularMatrix { pivot, scale })?;
    let moments = Moments::from_stacked(&x);
    let report = SolveReport {
        method: SolveMethod::Dense,
        iterations: 1,
        relative_residual: sys.relative_residual(&moments),
        converged: true,
        unknowns,
    };
    Ok((moments, report))
}

fn invert_diagonal<const N: usize>(sys: &BlockSystem<N>) -> Result<Vec<SMatrix<Complex64, N, N>>, SolverError> {
    (0..sys.n_blocks())
        .map(|m| {
            let d = sys.diag(m);
            let inv = d.try_inverse().ok_or(SolverError::DiagonalBlockSingular(m))?;
            // Frobenius condition estimate.
            let cond = d.norm() * inv.norm();
            if !(cond.is_finite() && cond < 1e14) {
                return Err(SolverError::DiagonalBlockSingular(m));
            }
            Ok(inv)
        })
        .collect()
}

/// Block splitting `x_m ← D_m⁻¹(S_m + Σ_{j≠m} O_mj x_j)`, sweeping `m` in
/// order. Stops once the relative residual is at most `tol`.
pub fn solve_block_iterative<const N: usize>(
    sys: &BlockSystem<N>,
    scheme: IterativeScheme,
    tol: f64,
    max_iter: usize,
) -> Result<(Moments<N>, SolveReport), SolverError> {
    let inv = invert_diagonal(sys)?;
    let n = sys.n_blocks();
    let method = match scheme {
        IterativeScheme::Jacobi => SolveMethod::BlockJacobi,
        IterativeScheme::GaussSeidel => SolveMethod::BlockGaussSeidel,
    };
    let mut x = Moments::<N>::zeros(n);
    let mut best = (x.clone(), sys.relative_residual(&x), 0);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        x = match scheme {
            IterativeScheme::Jacobi => {
                let blocks = (0..n).into_par_iter().map(|m| inv[m] * (sys.source(m) + sys.interaction(m, &x))).collect();
                Moments::new(blocks)
            }
            IterativeScheme::GaussSeidel => {
                let mut blocks: Vec<SVector<Complex64, N>> = x.blocks().to_vec();
                for m in 0..n {
                    let mut rhs = *sys.source(m);
                    for (j, xj) in blocks.iter().enumerate().filter(|(j, _)| *j != m) {
                        rhs += sys.offdiag(m, j) * xj;
                    }
                    blocks[m] = inv[m] * rhs;
                }
                Moments::new(blocks)
            }
        };
        let res = sys.relative_residual(&x);
        if res < best.1 || !best.1.is_finite() {
            best = (x.clone(), res, iterations);
        }
        if res <= tol || !res.is_finite() {
            break;
        }
    }
    let converged = best.1 <= tol;
    let report = SolveReport { method, iterations, relative_residual: best.1, converged, unknowns: sys.n_unknowns() };
    if converged {
        Ok((best.0, report))
    } else {
        Err(SolverError::NotConverged { best: best.0.to_stacked(), report })
    }
}

pub fn solve<const N: usize>(sys: &BlockSystem<N>, opts: &SolverOptions) -> Result<(Moments<N>, SolveReport), SolverError> {
    match opts.method {
        MethodChoice::Dense => solve_dense(sys, opts.dense_cap),
        MethodChoice::BlockJacobi => solve_block_iterative(sys, IterativeScheme::Jacobi, opts.tol, opts.max_iter),
        MethodChoice::BlockGaussSeidel => solve_block_iterative(sys, IterativeScheme::GaussSeidel, opts.tol, opts.max_iter),
        MethodChoice::Auto if sys.n_unknowns() <= opts.dense_cap => solve_dense(sys, opts.dense_cap),
        MethodChoice::Auto => solve_block_iterative(sys, IterativeScheme::GaussSeidel, opts.tol, opts.max_iter),
    }
}

/// `‖x_A - x_B‖₂` for the solutions of two same-shape systems.
pub fn perturbation_gap<const N: usize>(a: &BlockSystem<N>, b: &BlockSystem<N>, opts: &SolverOptions) -> Result<f64, SolverError> {
    if a.n_blocks() != b.n_blocks() {
        return Err(SolverError::ShapeMismatch(a.n_blocks(), b.n_blocks()));
    }
    let (xa, _) = solve(a, opts)?;
    let (xb, _) = solve(b, opts)?;
    Ok(xa.sub(&xb).norm())
}
