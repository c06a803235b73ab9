//! The GLRT and truncation tests, their uniform error over a finite set of
//! alternatives, and bisection search for empirical testing radii.

use serde::{Deserialize, Serialize};

use crate::cones::{tangent_cone_monotone, ConeDescriptor, ConeKind, ConePair};
use crate::error::{Error, Result};
use crate::gaussian::{derive_seed, try_for_each_replicate, McEstimate};
use crate::geometry::{analytic_candidates, GeometrySummary};
use crate::vecops::{dist, norm, norm_sq, normalized_relative};

/// Defaults for radius searches.
pub const DEFAULT_BISECT_ITERS: usize = 8;
pub const DEFAULT_RADIUS_N: usize = 4000;
pub const DEFAULT_RHO: f64 = 0.1;

/// A testing problem `H₀: θ ∈ C₁` against `H₁: θ ∈ C₂, dist(θ, C₁) >= ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestProblem {
    pub pair: ConePair,
    pub sigma: f64,
    pub epsilon: f64,
    pub rho: f64,
}

impl TestProblem {
    pub fn new(pair: ConePair, sigma: f64, epsilon: f64, rho: f64) -> Result<Self> {
        if !pair.is_certified() {
            return Err(Error::UncertifiedPair);
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be nonnegative, got {epsilon}"
            )));
        }
        if !(rho > 0.0 && rho < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "rho must lie in (0, 0.5), got {rho}"
            )));
        }
        Ok(Self {
            pair,
            sigma,
            epsilon,
            rho,
        })
    }

    /// The induced cone `K`, where alternatives live.
    pub fn alternative_cone(&self) -> Result<ConeDescriptor> {
        ConeDescriptor::induced(self.pair.clone())
    }
}

/// `T(y) = ‖Π_K y‖²` through the induced projection.
pub fn glrt_statistic(pair: &ConePair, y: &[f64]) -> Result<f64> {
    Ok(norm_sq(&pair.project_induced(y)?))
}

/// `T(y)` computed both ways; errors if they disagree beyond `1e-8`
/// relative to `‖Π_{C₂} y‖²`.
pub fn glrt_statistic_checked(pair: &ConePair, y: &[f64]) -> Result<f64> {
    let t = glrt_statistic(pair, y)?;
    let two = pair.two_projection_statistic(y)?;
    let scale = norm_sq(&pair.outer.project(y)?).max(f64::MIN_POSITIVE);
    if (t - two).abs() > 1e-8 * scale {
        return Err(Error::Oblique {
            max_residual: (t - two).abs() / scale,
            samples: 1,
        });
    }
    Ok(t)
}

/// A test statistic; the test rejects when the statistic reaches a threshold.
#[derive(Debug, Clone, PartialEq)]
pub enum Statistic {
    Glrt(ConePair),
    /// `‖y_S‖²` for a fixed coordinate set `S`.
    Truncation(Vec<usize>),
}

impl Statistic {
    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        match self {
            Statistic::Glrt(pair) => glrt_statistic(pair, y),
            Statistic::Truncation(coords) => Ok(coords.iter().map(|&i| y[i] * y[i]).sum()),
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        match self {
            Statistic::Glrt(pair) if pair.dim() != d => Err(Error::DimensionMismatch {
                expected: d,
                found: pair.dim(),
            }),
            Statistic::Glrt(pair) if !pair.is_certified() => Err(Error::UncertifiedPair),
            Statistic::Truncation(coords) if coords.is_empty() => {
                Err(Error::InvalidArgument("truncation set is empty".into()))
            }
            Statistic::Truncation(coords) if coords.iter().any(|&i| i >= d) => Err(
                Error::InvalidArgument(format!("truncation index out of range for d = {d}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Uniform error of the best threshold test at one separation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurvePoint {
    pub epsilon: f64,
    pub best_threshold: f64,
    pub type1: McEstimate,
    pub type2_worst: McEstimate,
    pub total: f64,
    pub directions_evaluated: usize,
    /// Index of the direction with the largest type-II error.
    pub worst_direction: usize,
}

impl ErrorCurvePoint {
    /// Combined standard error of `total`.
    pub fn stderr(&self) -> f64 {
        self.type1.stderr.hypot(self.type2_worst.stderr)
    }
}

/// Exhaustive sweep over thresholds. `null` and every entry of `alts` must
/// be sorted ascending. Candidates are all pooled values and `+∞`; the test
/// rejects when `T >= β`. Returns `(β, type1 count, worst type2 count, worst index)`.
fn sweep_thresholds(null: &[f64], alts: &[Vec<f64>]) -> (f64, usize, usize, usize) {
    let mut cands: Vec<f64> = null.iter().chain(alts.iter().flatten()).copied().collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    cands.push(f64::INFINITY);
    // below[k] = #{values < β} for the current candidate, advanced monotonically.
    let mut null_below = 0usize;
    let mut alt_below = vec![0usize; alts.len()];
    let mut best = (f64::INFINITY, usize::MAX, 0usize, 0usize, 0usize);
    for &beta in &cands {
        while null_below < null.len() && null[null_below] < beta {
            null_below += 1;
        }
        let mut worst = (0usize, 0usize);
        for (j, a) in alts.iter().enumerate() {
            let b = &mut alt_below[j];
            while *b < a.len() && a[*b] < beta {
                *b += 1;
            }
            if *b > worst.0 || j == 0 {
                worst = (*b, j);
            }
        }
        let type1 = null.len() - null_below;
        // Compare total errors as fractions with a common denominator.
        let score = type1 * alts[0].len() + worst.0 * null.len();
        if score < best.1 {
            best = (beta, score, type1, worst.0, worst.1);
        }
    }
    (best.0, best.2, best.3, best.4)
}

/// Simulates one statistic under the null and along fixed directions, with
/// common random numbers across `ε`: direction `j` replicate `i` always uses
/// the same noise vector.
#[derive(Debug, Clone)]
pub struct UniformErrorEstimator {
    statistic: Statistic,
    sigma: f64,
    directions: Vec<Vec<f64>>,
    n: usize,
    seed: u64,
    null_sorted: Vec<f64>,
}

impl UniformErrorEstimator {
    /// `directions` must be unit vectors in the alternative cone `k_cone`.
    pub fn new(
        statistic: Statistic,
        k_cone: &ConeDescriptor,
        sigma: f64,
        directions: Vec<Vec<f64>>,
        n: usize,
        seed: u64,
    ) -> Result<Self> {
        let d = k_cone.dim();
        statistic.validate(d)?;
        if directions.is_empty() {
            return Err(Error::EmptyDirections);
        }
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 replicates, got {n}"
            )));
        }
        for u in &directions {
            if u.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: u.len(),
                });
            }
            if (norm(u) - 1.0).abs() > 1e-9 || !k_cone.contains(u)? {
                return Err(Error::Membership {
                    what: "test direction".into(),
                    distance: k_cone.distance(u)?,
                });
            }
        }
        let mut null = Vec::with_capacity(n);
        let mut y = vec![0.0; d];
        try_for_each_replicate(d, n, derive_seed(seed, 0), |_, g| {
            for (a, b) in y.iter_mut().zip(g) {
                *a = sigma * b;
            }
            null.push(statistic.eval(&y)?);
            Ok(())
        })?;
        null.sort_by(f64::total_cmp);
        Ok(Self {
            statistic,
            sigma,
            directions,
            n,
            seed,
            null_sorted: null,
        })
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    /// Sorted null statistics.
    pub fn null_statistics(&self) -> &[f64] {
        &self.null_sorted
    }

    fn alternative_statistics(&self, epsilon: f64, j: usize) -> Result<Vec<f64>> {
        let u = &self.directions[j];
        let d = u.len();
        let mut stats = Vec::with_capacity(self.n);
        let mut y = vec![0.0; d];
        try_for_each_replicate(d, self.n, derive_seed(self.seed, 1 + j as u64), |_, g| {
            for ((a, b), t) in y.iter_mut().zip(g).zip(u) {
                *a = epsilon * t + self.sigma * b;
            }
            stats.push(self.statistic.eval(&y)?);
            Ok(())
        })?;
        stats.sort_by(f64::total_cmp);
        Ok(stats)
    }

    /// Uniform error at separation `epsilon`.
    pub fn at(&self, epsilon: f64) -> Result<ErrorCurvePoint> {
        let alts = (0..self.directions.len())
            .map(|j| self.alternative_statistics(epsilon, j))
            .collect::<Result<Vec<_>>>()?;
        let (beta, t1, t2, worst) = sweep_thresholds(&self.null_sorted, &alts);
        let type1 = McEstimate::proportion(t1, self.n, self.seed);
        let type2_worst = McEstimate::proportion(t2, self.n, self.seed);
        Ok(ErrorCurvePoint {
            epsilon,
            best_threshold: beta,
            total: type1.mean + type2_worst.mean,
            type1,
            type2_worst,
            directions_evaluated: self.directions.len(),
            worst_direction: worst,
        })
    }
}

/// Uniform GLRT error for a problem at its own `ε`.
pub fn uniform_error_glrt(
    problem: &TestProblem,
    directions: Vec<Vec<f64>>,
    n: usize,
    seed: u64,
) -> Result<ErrorCurvePoint> {
    let k = problem.alternative_cone()?;
    UniformErrorEstimator::new(
        Statistic::Glrt(problem.pair.clone()),
        &k,
        problem.sigma,
        directions,
        n,
        seed,
    )?
    .at(problem.epsilon)
}

/// Uniform error of the truncation test `‖y_S‖² >= β` over `directions`.
pub fn truncation_test_error(
    problem: &TestProblem,
    coords: &[usize],
    directions: Vec<Vec<f64>>,
    n: usize,
    seed: u64,
) -> Result<ErrorCurvePoint> {
    let k = problem.alternative_cone()?;
    UniformErrorEstimator::new(
        Statistic::Truncation(coords.to_vec()),
        &k,
        problem.sigma,
        directions,
        n,
        seed,
    )?
    .at(problem.epsilon)
}

/// Candidate hard alternatives: the normalized mean projection, the
/// per-kind analytic directions and `n_random` normalized projections of
/// Gaussian draws, deduplicated and verified in `K ∩ S`.
pub fn default_directions(
    cone: &ConeDescriptor,
    geometry: &GeometrySummary,
    n_random: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let d = cone.dim();
    let mut raw = Vec::new();
    if let Some(u) = normalized_relative(
        &cone.project(&geometry.mean_proj)?,
        norm(&geometry.mean_proj),
    ) {
        raw.push(u);
    }
    raw.extend(analytic_candidates(cone, &geometry.mean_proj)?);
    try_for_each_replicate(d, n_random, derive_seed(seed, u64::MAX), |_, g| {
        if let Some(u) = normalized_relative(&cone.project(g)?, norm(g)) {
            raw.push(u);
        }
        Ok(())
    })?;
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(raw.len());
    for u in raw {
        if !out.iter().any(|v| dist(v, &u) < 1e-10) {
            out.push(u);
        }
    }
    for u in &out {
        if !cone.contains(u)? {
            return Err(Error::Membership {
                what: "default direction".into(),
                distance: cone.distance(u)?,
            });
        }
    }
    Ok(out)
}

/// Tuning of a radius search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusParams {
    pub rho: f64,
    pub eps_lo: f64,
    /// Initial upper end; `None` picks one from the width of `K`.
    pub eps_hi: Option<f64>,
    pub bisect_iters: usize,
    pub n: usize,
    pub seed: u64,
    /// Random projection directions added to the analytic ones.
    pub n_random_directions: usize,
    /// Replicates for the geometry summary that seeds the direction set.
    pub geometry_n: usize,
    pub max_expansions: usize,
}

impl Default for RadiusParams {
    fn default() -> Self {
        Self {
            rho: DEFAULT_RHO,
            eps_lo: 0.0,
            eps_hi: None,
            bisect_iters: DEFAULT_BISECT_ITERS,
            n: DEFAULT_RADIUS_N,
            seed: 1,
            n_random_directions: 4,
            geometry_n: 2000,
            max_expansions: 12,
        }
    }
}

/// Bisection result for `ε ↦ inf_β total error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    /// Midpoint of the final bracket.
    pub epsilon: f64,
    pub lo: f64,
    pub hi: f64,
    pub rho: f64,
    pub evaluations: Vec<ErrorCurvePoint>,
    /// Pairs of evaluations where the error grew with `ε` by more than 5 SE.
    pub monotonicity_violations: usize,
}

impl RadiusEstimate {
    pub fn radius_sq(&self) -> f64 {
        self.epsilon * self.epsilon
    }

    pub fn bracket_sq(&self) -> (f64, f64) {
        (self.lo * self.lo, self.hi * self.hi)
    }
}

/// Count evaluations where the error at a larger `ε` exceeds the error at a
/// smaller one by more than 5 combined SE.
pub fn count_monotonicity_violations(points: &[ErrorCurvePoint]) -> usize {
    let mut sorted: Vec<&ErrorCurvePoint> = points.iter().collect();
    sorted.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let mut count = 0;
    for (i, a) in sorted.iter().enumerate() {
        for b in &sorted[i + 1..] {
            if b.total - a.total > 5.0 * a.stderr().hypot(b.stderr()).max(1e-12) {
                count += 1;
            }
        }
    }
    count
}

/// Bisection on `ε` for the level `ρ` with an auto-expanding bracket.
pub fn bisect_radius(
    est: &UniformErrorEstimator,
    params: &RadiusParams,
    initial_hi: f64,
) -> Result<RadiusEstimate> {
    let rho = params.rho;
    let mut evaluations = Vec::new();
    let mut lo = params.eps_lo;
    let mut hi = params.eps_hi.unwrap_or(initial_hi);
    if !(hi > lo) {
        return Err(Error::InvalidArgument(format!(
            "radius bracket [{lo}, {hi}] is empty"
        )));
    }
    let eval = |e: f64, evals: &mut Vec<ErrorCurvePoint>| -> Result<f64> {
        let p = est.at(e)?;
        let t = p.total;
        evals.push(p);
        Ok(t)
    };
    let mut expansions = 0;
    while eval(lo, &mut evaluations)? < rho {
        if lo == 0.0 || expansions >= params.max_expansions {
            return Err(Error::NonBracketing {
                lo,
                hi,
                target: rho,
            });
        }
        hi = lo;
        lo /= 2.0;
        expansions += 1;
    }
    while eval(hi, &mut evaluations)? > rho {
        if expansions >= params.max_expansions {
            return Err(Error::NonBracketing {
                lo,
                hi,
                target: rho,
            });
        }
        lo = hi;
        hi *= 2.0;
        expansions += 1;
    }
    for _ in 0..params.bisect_iters {
        let mid = 0.5 * (lo + hi);
        if eval(mid, &mut evaluations)? <= rho {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let monotonicity_violations = count_monotonicity_violations(&evaluations);
    Ok(RadiusEstimate {
        epsilon: 0.5 * (lo + hi),
        lo,
        hi,
        rho,
        evaluations,
        monotonicity_violations,
    })
}

/// Initial upper end for bisection: `σ · 2√(E‖Π_K g‖ + 1)`, generous for
/// radii of order `σ²·W`.
fn default_hi(sigma: f64, width: f64) -> f64 {
    sigma * 2.0 * (width + 1.0).sqrt() * 2.0
}

/// Empirical GLRT radius for `pair` at noise level `sigma`.
pub fn glrt_radius(pair: &ConePair, sigma: f64, params: &RadiusParams) -> Result<RadiusEstimate> {
    let k = ConeDescriptor::induced(pair.clone())?;
    let geom = GeometrySummary::compute(&k, params.geometry_n, derive_seed(params.seed, 7))?;
    let dirs = default_directions(&k, &geom, params.n_random_directions, params.seed)?;
    let est = UniformErrorEstimator::new(
        Statistic::Glrt(pair.clone()),
        &k,
        sigma,
        dirs,
        params.n,
        params.seed,
    )?;
    bisect_radius(&est, params, default_hi(sigma, geom.width.mean))
}

/// Empirical radius of the truncation test on `coords` over the default
/// directions of `K`.
pub fn truncation_radius(
    pair: &ConePair,
    coords: &[usize],
    sigma: f64,
    params: &RadiusParams,
) -> Result<RadiusEstimate> {
    let k = ConeDescriptor::induced(pair.clone())?;
    let geom = GeometrySummary::compute(&k, params.geometry_n, derive_seed(params.seed, 7))?;
    let dirs = default_directions(&k, &geom, params.n_random_directions, params.seed)?;
    let est = UniformErrorEstimator::new(
        Statistic::Truncation(coords.to_vec()),
        &k,
        sigma,
        dirs,
        params.n,
        params.seed,
    )?;
    bisect_radius(
        &est,
        params,
        default_hi(sigma, (coords.len() as f64).sqrt()),
    )
}

/// Radius of the tangent-cone problem `{0}` against `T_M(θ₀)`.
pub fn kpiece_radius(
    theta0: &[f64],
    sigma: f64,
    params: &RadiusParams,
) -> Result<(usize, RadiusEstimate)> {
    let t = tangent_cone_monotone(theta0)?;
    let pair = ConePair::zero_vs(t.cone.clone())?;
    Ok((t.k(), glrt_radius(&pair, sigma, params)?))
}

/// The product cone `C(α, d−1) × R` together with its truncation set `{1, d}`.
pub fn product_cone(d: usize, alpha: f64) -> Result<(ConeDescriptor, Vec<usize>)> {
    if d < 3 {
        return Err(Error::InvalidArgument("product cone needs d >= 3".into()));
    }
    let cone = ConeDescriptor::product(vec![
        ConeDescriptor::circular(d - 1, alpha)?,
        ConeDescriptor::whole_space(1)?,
    ])?;
    debug_assert_eq!(cone.kind(), ConeKind::Product);
    Ok((cone, vec![0, d - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_finds_perfect_separation() {
        let null = vec![0.0, 0.1, 0.2];
        let alts = vec![vec![1.0, 1.1, 1.2]];
        let (beta, t1, t2, _) = sweep_thresholds(&null, &alts);
        assert_eq!((beta, t1, t2), (1.0, 0, 0));
    }

    #[test]
    fn sweep_without_separation_is_one() {
        let null = vec![0.0, 1.0, 2.0, 3.0];
        let alts = vec![vec![0.0, 1.0, 2.0, 3.0]];
        let (_, t1, t2, _) = sweep_thresholds(&null, &alts);
        assert_eq!(t1 + t2, 4);
    }

    #[test]
    fn sweep_matches_brute_force() {
        use crate::gaussian::{sample_std_gaussian, RngStream};
        for case in 0..40u64 {
            let mut null = sample_std_gaussian(30, &RngStream::new(case, 0));
            let mut alts: Vec<Vec<f64>> = (0..3)
                .map(|j| {
                    sample_std_gaussian(30, &RngStream::new(case, 1 + j))
                        .iter()
                        .map(|v| v + 1.0)
                        .collect()
                })
                .collect();
            // Quantize to create ties.
            for v in null.iter_mut().chain(alts.iter_mut().flatten()) {
                *v = (*v * 4.0).round() / 4.0;
            }
            null.sort_by(f64::total_cmp);
            alts.iter_mut().for_each(|a| a.sort_by(f64::total_cmp));
            let (_, t1, t2, _) = sweep_thresholds(&null, &alts);
            let mut best = usize::MAX;
            let mut grid: Vec<f64> = null.iter().chain(alts.iter().flatten()).copied().collect();
            grid.push(f64::INFINITY);
            // Also probe midpoints between distinct values.
            let mut sorted = grid.clone();
            sorted.sort_by(f64::total_cmp);
            for w in sorted.windows(2) {
                grid.push(0.5 * (w[0] + w[1]));
            }
            grid.push(f64::NEG_INFINITY);
            for beta in grid {
                let e1 = null.iter().filter(|&&v| v >= beta).count();
                let e2 = alts
                    .iter()
                    .map(|a| a.iter().filter(|&&v| v < beta).count())
                    .max()
                    .unwrap();
                best = best.min(e1 + e2);
            }
            assert_eq!(t1 + t2, best, "case {case}");
        }
    }

    #[test]
    fn statistic_examples() {
        let p = ConePair::zero_vs(ConeDescriptor::orthant(2).unwrap()).unwrap();
        assert_eq!(glrt_statistic(&p, &[-1.0, 3.0]).unwrap(), 9.0);
        let p = ConePair::constants_vs_monotone(3).unwrap();
        assert!(glrt_statistic(&p, &[3.0, 1.0, 2.0]).unwrap().abs() < 1e-24);
        let p =
            ConePair::zero_vs(ConeDescriptor::circular(3, std::f64::consts::FRAC_PI_4).unwrap())
                .unwrap();
        assert!((glrt_statistic_checked(&p, &[0.0, 3.0, 4.0]).unwrap() - 12.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_problems() {
        let p = ConePair::zero_vs(ConeDescriptor::orthant(2).unwrap()).unwrap();
        assert!(TestProblem::new(p.clone(), 1.0, 0.0, 0.7).is_err());
        assert!(TestProblem::new(p.clone(), 0.0, 0.0, 0.1).is_err());
        let k = ConeDescriptor::orthant(2).unwrap();
        assert!(matches!(
            UniformErrorEstimator::new(Statistic::Glrt(p.clone()), &k, 1.0, vec![], 10, 1),
            Err(Error::EmptyDirections)
        ));
        assert!(matches!(
            UniformErrorEstimator::new(Statistic::Glrt(p), &k, 1.0, vec![vec![-1.0, 0.0]], 10, 1),
            Err(Error::Membership { .. })
        ));
    }
}
