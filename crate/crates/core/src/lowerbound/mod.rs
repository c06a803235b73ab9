//! χ² lower bounds on the minimax testing error from explicit priors on
//! `K ∩ Bᶜ(1)`.
//!
//! For a prior `Q` and i.i.d. `η, η' ~ Q`, every test has uniform error at
//! least `1 − ½√(E exp(ε²⟨η,η'⟩) − 1)` at separation `ε` (`σ = 1`).

mod fg;
mod orthant;
mod projection;

use serde::{Deserialize, Serialize};

use crate::cones::ConeDescriptor;
use crate::error::{Error, Result};
use crate::gaussian::{derive_seed, RngStream};
use crate::vecops::dot;

pub use fg::{block_lengths, BlockRule, MonotoneFg, FG_DELTA, FG_R};
pub use orthant::{
    ln_binomial, orthant_chi2_moment_exact, orthant_moment_bound, orthant_moment_coefficients,
    sample_orthant_sparse, sparsity,
};
pub use projection::{projection_prior_acceptance, sample_projection_prior, MAX_ATTEMPTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorKind {
    ProjectionBased,
    OrthantSparse,
    MonotoneFg,
}

impl PriorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PriorKind::ProjectionBased => "projection-based",
            PriorKind::OrthantSparse => "orthant-sparse",
            PriorKind::MonotoneFg => "monotone-fg",
        }
    }
}

/// A reproducible sampler over `K ∩ Bᶜ(1)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorSampler {
    ProjectionBased { cone: ConeDescriptor, width: f64 },
    OrthantSparse { d: usize, s: usize },
    MonotoneFg(MonotoneFg),
}

impl PriorSampler {
    /// Uniform `⌊√d⌋`-sparse prior on the orthant.
    pub fn orthant_sparse(d: usize) -> Result<Self> {
        let s = sparsity(d);
        if s == 0 || 2 * s > d {
            return Err(Error::Prior(format!(
                "orthant sparse prior needs d >= 4, got {d}"
            )));
        }
        Ok(Self::OrthantSparse { d, s })
    }

    pub fn monotone_fg(d: usize, centered: bool) -> Result<Self> {
        Ok(Self::MonotoneFg(MonotoneFg::build(d, centered)?))
    }

    pub fn projection(cone: ConeDescriptor, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "width estimate must be positive, got {width}"
            )));
        }
        Ok(Self::ProjectionBased { cone, width })
    }

    pub fn kind(&self) -> PriorKind {
        match self {
            Self::ProjectionBased { .. } => PriorKind::ProjectionBased,
            Self::OrthantSparse { .. } => PriorKind::OrthantSparse,
            Self::MonotoneFg(_) => PriorKind::MonotoneFg,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::ProjectionBased { cone, .. } => cone.dim(),
            Self::OrthantSparse { d, .. } => *d,
            Self::MonotoneFg(fg) => fg.d,
        }
    }

    pub fn sample(&self, stream: &RngStream) -> Result<Vec<f64>> {
        match self {
            Self::ProjectionBased { cone, width } => {
                Ok(sample_projection_prior(cone, *width, stream)?.0)
            }
            Self::OrthantSparse { d, s } => sample_orthant_sparse(*d, *s, stream),
            Self::MonotoneFg(fg) => fg.sample(stream),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMethod {
    ExactHypergeometric,
    McPairs,
}

impl MomentMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            MomentMethod::ExactHypergeometric => "exact-hypergeometric",
            MomentMethod::McPairs => "mc-pairs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundPoint {
    pub epsilon: f64,
    pub moment: f64,
    /// Zero for exact moments.
    pub moment_se: f64,
    pub error_lb: f64,
    pub method: MomentMethod,
    /// The top 1% of pair terms carry more than half of the sum.
    pub heavy_tail: bool,
    pub seed: u64,
    pub n_pairs: usize,
}

/// `1 − ½√(moment − 1)` clipped to `[0, 1]`.
pub fn error_lower_bound(moment: f64) -> f64 {
    (1.0 - 0.5 * (moment - 1.0).max(0.0).sqrt()).clamp(0.0, 1.0)
}

/// Inner products `⟨η_k, η'_k⟩` of i.i.d. prior pairs, stored once so the
/// moment can be evaluated at any `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairInnerProducts {
    pub values: Vec<f64>,
    pub seed: u64,
}

impl PairInnerProducts {
    /// Pair `k` uses streams `2k` and `2k + 1` under a seed derived from `seed`.
    pub fn sample(sampler: &PriorSampler, n_pairs: usize, seed: u64) -> Result<Self> {
        if n_pairs < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 pairs, got {n_pairs}"
            )));
        }
        let base = derive_seed(seed, 0x7072);
        let values = (0..n_pairs as u64)
            .map(|k| {
                let a = sampler.sample(&RngStream::new(base, 2 * k))?;
                let b = sampler.sample(&RngStream::new(base, 2 * k + 1))?;
                Ok(dot(&a, &b))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { values, seed })
    }

    /// `(mean, stderr, heavy_tail)` of `exp(λ·ip)`, computed relative to the
    /// largest term to avoid overflow.
    pub fn moment(&self, lambda: f64) -> (f64, f64, bool) {
        let n = self.values.len();
        let logs: Vec<f64> = self.values.iter().map(|v| lambda * v).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut scaled: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let sum: f64 = scaled.iter().sum();
        let mean_scaled = sum / n as f64;
        let var_scaled = scaled
            .iter()
            .map(|x| (x - mean_scaled).powi(2))
            .sum::<f64>()
            / (n - 1) as f64;
        let factor = top.exp();
        let mean = mean_scaled * factor;
        let se = (var_scaled / n as f64).sqrt() * factor;
        scaled.sort_by(|a, b| b.total_cmp(a));
        let k = n.div_ceil(100);
        let heavy = scaled[..k].iter().sum::<f64>() > 0.5 * sum;
        (mean, se, heavy)
    }

    pub fn point(&self, epsilon: f64) -> Result<LowerBoundPoint> {
        let (moment, se, heavy) = self.moment(epsilon * epsilon);
        if moment < 1.0 - 3.0 * se - 1e-12 {
            return Err(Error::MomentBelowOne { moment, stderr: se });
        }
        Ok(LowerBoundPoint {
            epsilon,
            moment,
            moment_se: se,
            error_lb: error_lower_bound(moment),
            method: MomentMethod::McPairs,
            heavy_tail: heavy,
            seed: self.seed,
            n_pairs: self.values.len(),
        })
    }
}

/// Evaluates the lower bound for one prior at many `ε`; exact for the
/// orthant prior, Monte Carlo over stored pairs otherwise.
#[derive(Debug, Clone)]
pub struct LowerBoundCurve {
    sampler: PriorSampler,
    pairs: Option<PairInnerProducts>,
    seed: u64,
}

impl LowerBoundCurve {
    pub fn new(sampler: PriorSampler, n_pairs: usize, seed: u64) -> Result<Self> {
        let pairs = match sampler {
            PriorSampler::OrthantSparse { .. } => None,
            _ => Some(PairInnerProducts::sample(&sampler, n_pairs, seed)?),
        };
        Ok(Self {
            sampler,
            pairs,
            seed,
        })
    }

    pub fn sampler(&self) -> &PriorSampler {
        &self.sampler
    }

    pub fn at(&self, epsilon: f64) -> Result<LowerBoundPoint> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be finite and >= 0, got {epsilon}"
            )));
        }
        match (&self.sampler, &self.pairs) {
            (PriorSampler::OrthantSparse { d, s }, _) => {
                let moment = orthant_chi2_moment_exact(*d, *s, epsilon * epsilon)?;
                Ok(LowerBoundPoint {
                    epsilon,
                    moment,
                    moment_se: 0.0,
                    error_lb: error_lower_bound(moment),
                    method: MomentMethod::ExactHypergeometric,
                    heavy_tail: false,
                    seed: self.seed,
                    n_pairs: 0,
                })
            }
            (_, Some(p)) => p.point(epsilon),
            (_, None) => unreachable!("pairs are sampled for every non-exact prior"),
        }
    }
}

/// One-shot lower bound at `epsilon`.
pub fn chi2_error_lower_bound(
    sampler: &PriorSampler,
    epsilon: f64,
    n_pairs: usize,
    seed: u64,
) -> Result<LowerBoundPoint> {
    LowerBoundCurve::new(sampler.clone(), n_pairs, seed)?.at(epsilon)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerRadiusParams {
    pub eps_hi: f64,
    pub bisect_iters: usize,
    pub n_pairs: usize,
    pub seed: u64,
    pub max_expansions: usize,
}

impl Default for LowerRadiusParams {
    fn default() -> Self {
        Self {
            eps_hi: 1.0,
            bisect_iters: 40,
            n_pairs: 20_000,
            seed: 1,
            max_expansions: 30,
        }
    }
}

/// Largest certified `ε` with `error_lb(ε) >= ρ`, with the final bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerRadius {
    /// Lower end of the bracket, where the bound is still at least `ρ`.
    pub epsilon: f64,
    pub lo: f64,
    pub hi: f64,
    pub rho: f64,
    pub at_lo: LowerBoundPoint,
}

impl LowerRadius {
    pub fn radius_sq(&self) -> f64 {
        self.epsilon * self.epsilon
    }
}

/// Bisection on the nonincreasing map `ε ↦ error_lb(ε)`.
pub fn minimax_lower_radius(
    curve: &LowerBoundCurve,
    rho: f64,
    params: &LowerRadiusParams,
) -> Result<LowerRadius> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rho must lie in (0, 1), got {rho}"
        )));
    }
    let mut lo = 0.0;
    let mut at_lo = curve.at(0.0)?;
    if at_lo.error_lb < rho {
        return Err(Error::NonBracketing {
            lo: 0.0,
            hi: params.eps_hi,
            target: rho,
        });
    }
    let mut hi = params.eps_hi;
    let mut expansions = 0;
    loop {
        let p = curve.at(hi)?;
        if p.error_lb < rho {
            break;
        }
        if expansions >= params.max_expansions {
            return Err(Error::NonBracketing {
                lo,
                hi,
                target: rho,
            });
        }
        lo = hi;
        at_lo = p;
        hi *= 2.0;
        expansions += 1;
    }
    for _ in 0..params.bisect_iters {
        let mid = 0.5 * (lo + hi);
        let p = curve.at(mid)?;
        if p.error_lb >= rho {
            lo = mid;
            at_lo = p;
        } else {
            hi = mid;
        }
    }
    Ok(LowerRadius {
        epsilon: lo,
        lo,
        hi,
        rho,
        at_lo,
    })
}
