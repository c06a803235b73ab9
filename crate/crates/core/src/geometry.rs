//! Monte Carlo estimators of the geometric functionals of a cone `K`:
//! Gaussian width, mean projection, extreme inner products on `K ∩ S`,
//! `δ²_LR`, `δ²_OPT`, the shift functional `Γ(θ)` and concentration checks.

use serde::{Deserialize, Serialize};

use crate::cones::ConeDescriptor;
use crate::error::{Error, Result};
use crate::gaussian::{try_for_each_replicate, McEstimate};
use crate::vecops::{dot, norm, normalized, normalized_relative};

/// Default replicate count for widths and mean projections.
pub const DEFAULT_WIDTH_N: usize = 100_000;
/// Default replicate count for `Γ(θ)`.
pub const DEFAULT_GAMMA_N: usize = 10_000;
/// Normalized projection samples added to the `inf_inner` candidate set.
pub const INF_SAMPLE_CANDIDATES: usize = 256;

/// Coordinatewise Monte Carlo mean of a vector-valued quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n: usize,
    pub seed: u64,
}

impl VectorEstimate {
    /// `√(Σ se_j²)`, the typical norm of pure noise in `mean`.
    pub fn noise_norm(&self) -> f64 {
        self.stderr.iter().map(|s| s * s).sum::<f64>().sqrt()
    }
}

/// Running sums for width, second moment and coordinate means.
struct Accumulator {
    n: usize,
    norms: Vec<f64>,
    sq_norms: Vec<f64>,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    samples: Vec<Vec<f64>>,
}

impl Accumulator {
    fn run(cone: &ConeDescriptor, n: usize, seed: u64, keep: usize) -> Result<Self> {
        let d = cone.dim();
        let mut acc = Accumulator {
            n,
            norms: Vec::with_capacity(n),
            sq_norms: Vec::with_capacity(n),
            sum: vec![0.0; d],
            sum_sq: vec![0.0; d],
            samples: Vec::new(),
        };
        try_for_each_replicate(d, n, seed, |i, g| {
            let p = cone.project(g)?;
            let nn = norm(&p);
            acc.norms.push(nn);
            acc.sq_norms.push(nn * nn);
            for ((s, q), v) in acc.sum.iter_mut().zip(acc.sum_sq.iter_mut()).zip(&p) {
                *s += v;
                *q += v * v;
            }
            if i < keep {
                if let Some(u) = normalized_relative(&p, norm(g)) {
                    acc.samples.push(u);
                }
            }
            Ok(())
        })?;
        Ok(acc)
    }

    fn mean_projection(&self, seed: u64) -> VectorEstimate {
        let nf = self.n as f64;
        let mean: Vec<f64> = self.sum.iter().map(|s| s / nf).collect();
        let stderr = self
            .sum_sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| {
                let var = ((q - nf * m * m) / (nf - 1.0)).max(0.0);
                (var / nf).sqrt()
            })
            .collect();
        VectorEstimate {
            mean,
            stderr,
            n: self.n,
            seed,
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 replicates, got {n}"
        )));
    }
    Ok(())
}

/// `(E‖Π_K g‖, E‖Π_K g‖²)`.
pub fn estimate_width(
    cone: &ConeDescriptor,
    n: usize,
    seed: u64,
) -> Result<(McEstimate, McEstimate)> {
    check_n(n)?;
    let acc = Accumulator::run(cone, n, seed, 0)?;
    Ok((
        McEstimate::from_values(&acc.norms, seed)?,
        McEstimate::from_values(&acc.sq_norms, seed)?,
    ))
}

/// Coordinatewise estimate of `E Π_K g`.
pub fn estimate_mean_projection(
    cone: &ConeDescriptor,
    n: usize,
    seed: u64,
) -> Result<VectorEstimate> {
    check_n(n)?;
    Ok(Accumulator::run(cone, n, seed, 0)?.mean_projection(seed))
}

/// Known elements of `K` that are natural minimizers or maximizers of a
/// linear functional `⟨·, v⟩`, normalized and verified to lie in `K ∩ S`.
///
/// Per kind: orthant `e_j` at the smallest coordinate of `v`, `e_1` and
/// `1/√d`; monotone `±1/√d` and single steps; circular `e_1` and boundary
/// rays (including the one opposite to `v_{2:d}`); subspace `±` basis
/// vectors; ray and generator cones their generators; products embed the
/// candidates of each block; induced cones map the outer candidates into
/// `K`. Every cone also gets `Π_K(−v)` and `Π_K(v)` when nonzero.
pub fn analytic_candidates(cone: &ConeDescriptor, v: &[f64]) -> Result<Vec<Vec<f64>>> {
    let d = cone.dim();
    if v.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: v.len(),
        });
    }
    let mut raw = kind_candidates(cone, v)?;
    let neg: Vec<f64> = v.iter().map(|x| -x).collect();
    for x in [cone.project(&neg)?, cone.project(v)?] {
        if norm(&x) > 1e-9 * norm(v) {
            raw.push(x);
        }
    }
    let mut out = Vec::with_capacity(raw.len());
    for c in raw {
        let Some(u) = normalized(&c) else { continue };
        let distance = cone.distance(&u)?;
        if !cone.contains(&u)? {
            return Err(Error::Membership {
                what: format!("{} candidate", cone.kind()),
                distance,
            });
        }
        out.push(u);
    }
    Ok(out)
}

fn unit(d: usize, j: usize, sign: f64) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[j] = sign;
    e
}

fn step_positions(d: usize) -> Vec<usize> {
    let mut js = vec![1, d / 4, d / 2, (3 * d) / 4, d - 1];
    js.retain(|&j| j >= 1 && j < d);
    js.sort_unstable();
    js.dedup();
    js
}

fn kind_candidates(cone: &ConeDescriptor, v: &[f64]) -> Result<Vec<Vec<f64>>> {
    let d = cone.dim();
    Ok(match cone {
        ConeDescriptor::Orthant { .. } => {
            let jmin = (0..d).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0);
            vec![unit(d, jmin, 1.0), unit(d, 0, 1.0), vec![1.0; d]]
        }
        ConeDescriptor::Monotone { .. } => {
            let mut c = vec![vec![1.0; d], vec![-1.0; d]];
            for j in step_positions(d) {
                c.push((0..d).map(|i| if i >= j { 1.0 } else { 0.0 }).collect());
                c.push((0..d).map(|i| if i < j { -1.0 } else { 0.0 }).collect());
            }
            c
        }
        ConeDescriptor::Circular { alpha, .. } => {
            let (ca, sa) = (alpha.cos(), alpha.sin());
            let boundary = |u: &[f64]| {
                let mut b = vec![ca];
                b.extend(u.iter().map(|x| sa * x));
                b
            };
            let mut c = vec![unit(d, 0, 1.0)];
            if let Some(w) = normalized(&v[1..]) {
                c.push(boundary(&w.iter().map(|x| -x).collect::<Vec<_>>()));
                c.push(boundary(&w));
            }
            c.push(boundary(&unit(d - 1, 0, 1.0)));
            c.push(boundary(&unit(d - 1, 0, -1.0)));
            c
        }
        ConeDescriptor::Subspace { basis, .. } => {
            let k = basis.ncols().min(4);
            let mut c = Vec::with_capacity(2 * k);
            for j in 0..k {
                let col: Vec<f64> = basis.column(j).iter().copied().collect();
                c.push(col.iter().map(|x| -x).collect());
                c.push(col);
            }
            c
        }
        ConeDescriptor::Ray { direction } => vec![direction.clone()],
        ConeDescriptor::Generator { generators } => generators
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect(),
        ConeDescriptor::Halfspace { .. } => {
            let mut c = Vec::new();
            for j in 0..d.min(32) {
                c.push(cone.project(&unit(d, j, 1.0))?);
                c.push(cone.project(&unit(d, j, -1.0))?);
            }
            c
        }
        ConeDescriptor::Product { components } => {
            let mut c = Vec::new();
            let mut offset = 0;
            for comp in components {
                let k = comp.dim();
                for local in analytic_candidates(comp, &v[offset..offset + k])? {
                    let mut full = vec![0.0; d];
                    full[offset..offset + k].copy_from_slice(&local);
                    c.push(full);
                }
                offset += k;
            }
            c
        }
        ConeDescriptor::Induced(pair) => {
            // Outer candidates lying in the inner cone map to rounding
            // residue, which must not be normalized into a fake direction.
            let mut c = Vec::new();
            for x in kind_candidates(&pair.outer, v)? {
                let p = pair.project_induced(&x)?;
                if norm(&p) > 1e-9 * norm(&x) {
                    c.push(p);
                }
            }
            c
        }
    })
}

/// Result of the candidate search for `inf_{η∈K∩S} ⟨η, v⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfInner {
    /// Upper bound on the infimum (the best candidate value).
    pub value: f64,
    /// The candidate attaining `value`.
    pub argmin: Vec<f64>,
    pub candidates: usize,
}

/// Minimum of `⟨η, v⟩` over [`analytic_candidates`] plus the given
/// normalized samples (each checked for membership).
pub fn inf_inner_on_sphere(
    cone: &ConeDescriptor,
    v: &[f64],
    samples: &[Vec<f64>],
) -> Result<InfInner> {
    let mut cands = analytic_candidates(cone, v)?;
    for s in samples {
        if (norm(s) - 1.0).abs() > 1e-9 || !cone.contains(s)? {
            return Err(Error::Membership {
                what: "sample candidate".into(),
                distance: cone.distance(s)?,
            });
        }
        cands.push(s.clone());
    }
    let (value, argmin) = cands
        .iter()
        .map(|c| (dot(c, v), c))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(val, c)| (val, c.clone()))
        .ok_or_else(|| Error::InvalidCone("no candidates in K ∩ S".into()))?;
    Ok(InfInner {
        value,
        argmin,
        candidates: cands.len(),
    })
}

/// `min{W, (W / max(0, inf))²}` with an infinite second term when `inf <= 0`.
pub fn delta_lr_sq(width: f64, inf_inner: f64) -> f64 {
    if inf_inner <= 0.0 {
        width
    } else {
        width.min((width / inf_inner).powi(2))
    }
}

/// `min{W, (W / ‖E Π_K g‖)²}`; a mean projection indistinguishable from
/// noise gives an infinite second term.
pub fn delta_opt_sq(width: f64, mean_norm: f64, noise_norm: f64) -> f64 {
    if mean_norm <= 3.0 * noise_norm || mean_norm == 0.0 {
        width
    } else {
        width.min((width / mean_norm).powi(2))
    }
}

/// All geometric estimates for one cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub cone: String,
    pub d: usize,
    pub width: McEstimate,
    pub width_sq: McEstimate,
    pub mean_proj: Vec<f64>,
    pub mean_proj_stderr: Vec<f64>,
    pub inf_inner: f64,
    pub sup_inner: f64,
    /// `(W / inf)²` when `inf > 0`, otherwise absent (infinite).
    pub lr_second_term: Option<f64>,
    /// `(W / ‖mean_proj‖)²` unless the mean projection is pure noise.
    pub opt_second_term: Option<f64>,
    pub delta_lr_sq: f64,
    pub delta_opt_sq: f64,
    pub seed: u64,
    pub n: usize,
}

impl GeometrySummary {
    pub fn compute(cone: &ConeDescriptor, n: usize, seed: u64) -> Result<Self> {
        check_n(n)?;
        let acc = Accumulator::run(cone, n, seed, INF_SAMPLE_CANDIDATES)?;
        let width = McEstimate::from_values(&acc.norms, seed)?;
        let width_sq = McEstimate::from_values(&acc.sq_norms, seed)?;
        let mp = acc.mean_projection(seed);
        let inf = inf_inner_on_sphere(cone, &mp.mean, &acc.samples)?;
        let sup_inner = norm(&mp.mean);
        let w = width.mean;
        let lr_second_term = (inf.value > 0.0).then(|| (w / inf.value).powi(2));
        let noise = mp.noise_norm();
        let opt_second_term =
            (sup_inner > 3.0 * noise && sup_inner > 0.0).then(|| (w / sup_inner).powi(2));
        Ok(Self {
            cone: cone.kind().to_string(),
            d: cone.dim(),
            delta_lr_sq: delta_lr_sq(w, inf.value),
            delta_opt_sq: delta_opt_sq(w, sup_inner, noise),
            width,
            width_sq,
            mean_proj: mp.mean,
            mean_proj_stderr: mp.stderr,
            inf_inner: inf.value,
            sup_inner,
            lr_second_term,
            opt_second_term,
            seed,
            n,
        })
    }

    /// `‖mean_proj‖` falls within three noise norms of zero.
    pub fn mean_is_noise(&self) -> bool {
        self.opt_second_term.is_none()
    }
}

/// Paired estimate of `Γ(θ) = E(‖Π_K(θ+g)‖ − ‖Π_K g‖)`.
pub fn gamma_shift(
    cone: &ConeDescriptor,
    theta: &[f64],
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_n(n)?;
    let d = cone.dim();
    if theta.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: theta.len(),
        });
    }
    let mut values = Vec::with_capacity(n);
    let mut shifted = vec![0.0; d];
    try_for_each_replicate(d, n, seed, |_, g| {
        for ((s, t), x) in shifted.iter_mut().zip(theta).zip(g) {
            *s = t + x;
        }
        values.push(norm(&cone.project(&shifted)?) - norm(&cone.project(g)?));
        Ok(())
    })?;
    McEstimate::from_values(&values, seed)
}

/// Empirical deviation frequencies of `Z = ‖Π_K g‖` at one level `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    /// `P(Z − Ẑ >= t)`
    pub upper: McEstimate,
    /// `P(Z − Ẑ <= −t)`
    pub lower: McEstimate,
    /// `exp(−t²/2)`
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub width: McEstimate,
    pub tails: Vec<TailRow>,
    /// Sample variance of `Z` with its standard error.
    pub variance: McEstimate,
    pub variance_bound: f64,
}

impl ConcentrationReport {
    /// Every tail and the variance sit below their bounds plus `k` SE.
    pub fn within_bounds(&self, k: f64) -> bool {
        self.tails.iter().all(|r| {
            r.upper.mean <= r.bound + k * r.upper.stderr
                && r.lower.mean <= r.bound + k * r.lower.stderr
        }) && self.variance.mean <= self.variance_bound + k * self.variance.stderr
    }
}

pub const TAIL_LEVELS: [f64; 3] = [0.5, 1.0, 2.0];

fn projection_norms(cone: &ConeDescriptor, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_n(n)?;
    let mut z = Vec::with_capacity(n);
    try_for_each_replicate(cone.dim(), n, seed, |_, g| {
        z.push(norm(&cone.project(g)?));
        Ok(())
    })?;
    Ok(z)
}

/// Tails of `‖Π_K g‖` around its plug-in mean against `exp(−t²/2)`, and its
/// variance against 4.
pub fn concentration_report(
    cone: &ConeDescriptor,
    n: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    let z = projection_norms(cone, n, seed)?;
    let width = McEstimate::from_values(&z, seed)?;
    let tails = TAIL_LEVELS
        .iter()
        .map(|&t| TailRow {
            t,
            upper: McEstimate::proportion(
                z.iter().filter(|&&x| x - width.mean >= t).count(),
                n,
                seed,
            ),
            lower: McEstimate::proportion(
                z.iter().filter(|&&x| x - width.mean <= -t).count(),
                n,
                seed,
            ),
            bound: (-t * t / 2.0).exp(),
        })
        .collect();
    let dev: Vec<f64> = z
        .iter()
        .map(|x| (x - width.mean).powi(2) * n as f64 / (n - 1) as f64)
        .collect();
    let variance = McEstimate::from_values(&dev, seed)?;
    Ok(ConcentrationReport {
        width,
        tails,
        variance,
        variance_bound: 4.0,
    })
}

/// Plug-in estimate of `P(‖Π_K g‖ > E‖Π_K g‖)`.
pub fn median_exceedance(cone: &ConeDescriptor, n: usize, seed: u64) -> Result<McEstimate> {
    let z = projection_norms(cone, n, seed)?;
    let w = z.iter().sum::<f64>() / n as f64;
    Ok(McEstimate::proportion(
        z.iter().filter(|&&x| x > w).count(),
        n,
        seed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_branches() {
        assert_eq!(delta_lr_sq(5.0, 0.0), 5.0);
        assert_eq!(delta_lr_sq(5.0, -1.0), 5.0);
        assert_eq!(delta_lr_sq(5.0, 2.5), 4.0);
        assert_eq!(delta_lr_sq(2.0, 0.1), 2.0);
        assert_eq!(delta_opt_sq(5.0, 0.01, 0.1), 5.0);
        assert_eq!(delta_opt_sq(5.0, 5.0, 0.1), 1.0);
    }

    #[test]
    fn gamma_at_zero_is_exactly_zero() {
        let c = ConeDescriptor::monotone(10).unwrap();
        let g = gamma_shift(&c, &[0.0; 10], 100, 3).unwrap();
        assert_eq!((g.mean, g.stderr), (0.0, 0.0));
    }

    #[test]
    fn orthant_candidates_pick_smallest_coordinate() {
        let c = ConeDescriptor::orthant(4).unwrap();
        let inf = inf_inner_on_sphere(&c, &[3.0, 1.0, 2.0, 5.0], &[]).unwrap();
        assert_eq!(inf.value, 1.0);
        assert_eq!(inf.argmin, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn bad_sample_candidate_is_trapped() {
        let c = ConeDescriptor::orthant(2).unwrap();
        let r = inf_inner_on_sphere(&c, &[1.0, 1.0], &[vec![-1.0, 0.0]]);
        assert!(matches!(r, Err(Error::Membership { .. })));
    }

    #[test]
    fn summary_fields_are_consistent() {
        let c = ConeDescriptor::orthant(8).unwrap();
        let s = GeometrySummary::compute(&c, 2000, 1).unwrap();
        assert_eq!(s.sup_inner, norm(&s.mean_proj));
        assert!(s.width.mean * s.width.mean <= s.width_sq.mean);
        assert!(s.delta_lr_sq <= s.width.mean);
        assert!(s.delta_opt_sq <= s.delta_lr_sq + 1e-12);
    }
}
