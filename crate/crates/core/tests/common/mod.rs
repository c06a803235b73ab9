#![allow(dead_code)]

use conetest::cones::{ConeDescriptor, ConePair};
use conetest::gaussian::{sample_std_gaussian, RngStream};
use conetest::nalgebra::DMatrix;
use conetest::vecops::norm;

/// One cone of every kind in `R^d` (`d >= 3`).
pub fn cone_catalog(d: usize, seed: u64) -> Vec<(String, ConeDescriptor)> {
    let gen = |rows: usize, cols: usize, stream: u64| {
        let raw = sample_std_gaussian(rows * cols, &RngStream::new(seed, stream));
        DMatrix::from_row_slice(rows, cols, &raw)
    };
    let ray = sample_std_gaussian(d, &RngStream::new(seed, 10));
    vec![
        ("orthant".into(), ConeDescriptor::orthant(d).unwrap()),
        ("monotone".into(), ConeDescriptor::monotone(d).unwrap()),
        (
            "circular".into(),
            ConeDescriptor::circular(d, std::f64::consts::FRAC_PI_4).unwrap(),
        ),
        (
            "subspace".into(),
            ConeDescriptor::random_subspace(d, (d / 2).max(1), seed).unwrap(),
        ),
        ("ray".into(), ConeDescriptor::ray(ray).unwrap()),
        (
            "generator".into(),
            ConeDescriptor::generator(gen(d, 6.min(2 * d), 11)).unwrap(),
        ),
        (
            "halfspace".into(),
            ConeDescriptor::halfspace(gen(5.min(d), d, 12)).unwrap(),
        ),
        (
            "product".into(),
            ConeDescriptor::product(vec![
                ConeDescriptor::circular(d - 1, 0.6).unwrap(),
                ConeDescriptor::whole_space(1).unwrap(),
            ])
            .unwrap(),
        ),
        (
            "induced".into(),
            ConeDescriptor::induced(ConePair::constants_vs_monotone(d).unwrap()).unwrap(),
        ),
    ]
}

/// Projection onto the circular cone by a search that does not use the
/// closed form: reduce to the plane spanned by `e_1` and `x_{2:d}`, then find
/// the best boundary ray by bisection on the derivative of `⟨x, u(φ)⟩`.
pub fn circular_oracle(alpha: f64, x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let t = norm(&x[1..]);
    let x1 = x[0];
    let angle = t.atan2(x1);
    if angle <= alpha {
        return x.to_vec();
    }
    let u: Vec<f64> = if t > 0.0 {
        x[1..].iter().map(|v| v / t).collect()
    } else {
        let mut e = vec![0.0; d - 1];
        e[0] = 1.0;
        e
    };
    let score = |phi: f64| x1 * phi.cos() + t * phi.sin();
    let slope = |phi: f64| -x1 * phi.sin() + t * phi.cos();
    let (mut lo, mut hi) = (-alpha, alpha);
    if slope(hi) >= 0.0 {
        lo = hi;
    } else if slope(lo) <= 0.0 {
        hi = lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let phi = 0.5 * (lo + hi);
    let r = score(phi).max(0.0);
    let mut out = Vec::with_capacity(d);
    out.push(r * phi.cos());
    out.extend(u.iter().map(|v| r * phi.sin() * v));
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Brute-force `E exp(λ⟨η,η'⟩)` for the uniform `s`-sparse prior on `R^d`,
/// enumerating every ordered pair of supports.
pub fn orthant_moment_brute_force(d: usize, s: usize, lambda: f64) -> f64 {
    let supports: Vec<u32> = (0u32..(1 << d))
        .filter(|m| m.count_ones() as usize == s)
        .collect();
    let mut total = 0.0;
    for a in &supports {
        for b in &supports {
            let overlap = (a & b).count_ones() as f64;
            total += (lambda * overlap / s as f64).exp();
        }
    }
    total / (supports.len() * supports.len()) as f64
}
