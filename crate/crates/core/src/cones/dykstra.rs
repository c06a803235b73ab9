//! Dykstra's alternating projection onto an intersection of halfspaces
//! `{x : a_iᵀ x <= 0}`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::vecops::{dot, norm_sq};

pub const DYKSTRA_TOL: f64 = 1e-10;
pub const DYKSTRA_MAX_CYCLES: usize = 100_000;

/// Project `x` onto `{y : A y <= 0}` with Dykstra's algorithm.
///
/// Stops when a full cycle moves the iterate by less than
/// `DYKSTRA_TOL * max(1, ‖x‖)`. On failure the error carries the best iterate.
pub fn project_halfspaces_dykstra(constraints: &DMatrix<f64>, x: &[f64]) -> Result<Vec<f64>> {
    let (m, d) = constraints.shape();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|i| constraints.row(i).iter().copied().collect())
        .collect();
    let row_sq: Vec<f64> = rows.iter().map(|r| norm_sq(r)).collect();
    let scale = norm_sq(x).sqrt().max(1.0);
    let mut y = x.to_vec();
    let mut incr = vec![vec![0.0; d]; m];
    let mut change = f64::INFINITY;
    for _cycle in 0..DYKSTRA_MAX_CYCLES {
        let mut moved = 0.0;
        for i in 0..m {
            if row_sq[i] == 0.0 {
                continue;
            }
            // z = y + p_i, then project z onto halfspace i.
            let z: Vec<f64> = y.iter().zip(&incr[i]).map(|(a, b)| a + b).collect();
            let viol = dot(&rows[i], &z);
            let k = if viol > 0.0 { viol / row_sq[i] } else { 0.0 };
            for j in 0..d {
                let new = z[j] - k * rows[i][j];
                moved += (new - y[j]) * (new - y[j]);
                incr[i][j] = z[j] - new;
                y[j] = new;
            }
        }
        change = moved.sqrt();
        if change <= DYKSTRA_TOL * scale {
            return Ok(y);
        }
    }
    Err(Error::NoConvergence {
        solver: "dykstra",
        iterations: DYKSTRA_MAX_CYCLES,
        residual: change,
        best: y,
    })
}
