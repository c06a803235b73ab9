//! Lawson-Hanson active-set nonnegative least squares, used to project onto
//! finitely generated cones `{X λ : λ >= 0}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// KKT tolerance on the dual variables `w = Xᵀ(x − Xλ)`.
pub const NNLS_TOL: f64 = 1e-9;

/// Solution of an NNLS problem.
#[derive(Debug, Clone)]
pub struct NnlsSolution {
    /// Nonnegative coefficients, one per generator column.
    pub lambda: Vec<f64>,
    /// `X λ`, the projection of the right-hand side onto the cone.
    pub fitted: Vec<f64>,
    /// Outer iterations used.
    pub iterations: usize,
}

/// Solve `min_{λ >= 0} ‖X λ − x‖²` by the Lawson-Hanson active-set method.
pub fn nnls(generators: &DMatrix<f64>, x: &[f64]) -> Result<NnlsSolution> {
    let (n, p) = generators.shape();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let b = DVector::from_column_slice(x);
    // Scale the tolerance by the problem magnitude so homogeneity holds.
    let col_scale = generators
        .column_iter()
        .map(|c| c.norm())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let tol = NNLS_TOL * col_scale * b.norm().max(f64::MIN_POSITIVE);

    let mut lambda = DVector::<f64>::zeros(p);
    let mut passive = vec![false; p];
    let max_outer = 3 * p.max(1) + 10;
    let mut iterations = 0;

    loop {
        let resid = &b - generators * &lambda;
        let w = generators.transpose() * &resid;
        let candidate = (0..p)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j_new) = candidate else { break };
        if iterations >= max_outer {
            return Err(Error::NoConvergence {
                solver: "nnls",
                iterations,
                residual: w.max(),
                best: (generators * &lambda).iter().copied().collect(),
            });
        }
        iterations += 1;
        passive[j_new] = true;

        loop {
            let idx: Vec<usize> = (0..p).filter(|&j| passive[j]).collect();
            let z_p = solve_passive(generators, &b, &idx);
            if z_p.iter().all(|&v| v > 0.0) {
                for (k, &j) in idx.iter().enumerate() {
                    lambda[j] = z_p[k];
                }
                break;
            }
            // Step back towards the feasible region until some coefficient hits zero.
            let mut alpha = f64::INFINITY;
            let mut blocking = idx[0];
            for (k, &j) in idx.iter().enumerate() {
                if z_p[k] <= 0.0 {
                    let denom = lambda[j] - z_p[k];
                    let a = if denom > 0.0 { lambda[j] / denom } else { 0.0 };
                    if a < alpha {
                        alpha = a;
                        blocking = j;
                    }
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                lambda[j] += alpha * (z_p[k] - lambda[j]);
            }
            lambda[blocking] = 0.0;
            for &j in &idx {
                if lambda[j] <= 0.0 {
                    lambda[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }

    let fitted = generators * &lambda;
    Ok(NnlsSolution {
        lambda: lambda.iter().copied().collect(),
        fitted: fitted.iter().copied().collect(),
        iterations,
    })
}

/// Unconstrained least squares on the passive columns.
fn solve_passive(x: &DMatrix<f64>, b: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    let sub = x.select_columns(idx);
    let svd = sub.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max().max(f64::MIN_POSITIVE);
    svd.solve(b, eps)
        .map(|m| m.column(0).into_owned())
        .unwrap_or_else(|_| DVector::zeros(idx.len()))
}
