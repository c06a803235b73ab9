//! The uniform `s`-sparse prior on the orthant and its exact χ² moment.

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::gaussian::RngStream;
use crate::vecops::log_sum_exp;

/// `ln C(n, k)` by a product of ratios (exact enough for `n` in the
/// millions, no gamma function needed).
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k).map(|j| ((n - k + j) as f64 / j as f64).ln()).sum()
}

/// `s = ⌊√d⌋`, computed without floating-point rounding surprises.
pub fn sparsity(d: usize) -> usize {
    let mut s = (d as f64).sqrt() as usize;
    while s * s > d {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= d {
        s += 1;
    }
    s
}

/// A vector with `s` entries equal to `1/√s` on a uniform random support.
pub fn sample_orthant_sparse(d: usize, s: usize, stream: &RngStream) -> Result<Vec<f64>> {
    if s == 0 || s > d {
        return Err(Error::Prior(format!("sparsity {s} invalid for d = {d}")));
    }
    let mut rng = stream.rng();
    let v = 1.0 / (s as f64).sqrt();
    let mut eta = vec![0.0; d];
    for i in sample(&mut rng, d, s) {
        eta[i] = v;
    }
    Ok(eta)
}

fn check_sparsity(d: usize, s: usize) -> Result<()> {
    if s == 0 || 2 * s > d {
        return Err(Error::Prior(format!(
            "need 1 <= s <= d/2, got s = {s}, d = {d}"
        )));
    }
    Ok(())
}

/// `E exp(λ⟨η,η'⟩) = C(d,s)⁻¹ Σ_i C(s,i) C(d−s,s−i) e^{λ i/s}`, summed in
/// log space.
pub fn orthant_chi2_moment_exact(d: usize, s: usize, lambda: f64) -> Result<f64> {
    check_sparsity(d, s)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    let ln_total = ln_binomial(d, s);
    let terms: Vec<f64> = (0..=s)
        .map(|i| {
            ln_binomial(s, i) + ln_binomial(d - s, s - i) - ln_total + lambda * i as f64 / s as f64
        })
        .collect();
    let m = log_sum_exp(&terms).exp();
    if !m.is_finite() {
        return Err(Error::Prior(format!(
            "moment overflows at lambda = {lambda}"
        )));
    }
    Ok(m)
}

/// The coefficients `A_i = (s!(d−s)!)² / ((s−i)!² d! (d−2s+i)!)` for
/// `i = 0..=s`, built from `A_0` and the ratio `(s−i+1)²/(d−2s+i)`.
pub fn orthant_moment_coefficients(d: usize, s: usize) -> Result<Vec<f64>> {
    check_sparsity(d, s)?;
    // ln A_0 = 2 ln (d−s)! − ln d! − ln (d−2s)! = ln C(d−s, s) − ln C(d, s)
    let mut ln_a = ln_binomial(d - s, s) - ln_binomial(d, s);
    let mut out = vec![ln_a.exp()];
    for i in 1..=s {
        let num = ((s - i + 1) * (s - i + 1)) as f64;
        let den = (d - 2 * s + i) as f64;
        ln_a += (num / den).ln();
        out.push(ln_a.exp());
    }
    Ok(out)
}

/// `exp(exp((2+λ)/(√d−1)) − (1−1/√d)²)`.
pub fn orthant_moment_bound(d: usize, lambda: f64) -> Result<f64> {
    if d < 4 {
        return Err(Error::InvalidArgument(format!(
            "bound needs d >= 4, got {d}"
        )));
    }
    let r = (d as f64).sqrt();
    let inner = ((2.0 + lambda) / (r - 1.0)).exp() - (1.0 - 1.0 / r).powi(2);
    Ok(inner.exp())
}
