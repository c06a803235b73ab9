//! The `F·G` prior on the monotone cone: `η = F G b` with `b` uniform over
//! `s`-sparse vectors with entries `1/√s`, `G` lower triangular with entries
//! `r^{i−j}` and `F` the normalized indicators of `m` consecutive blocks.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::orthant::sparsity;
use crate::error::{Error, Result};
use crate::gaussian::RngStream;
use crate::vecops::{dot, norm};

pub const FG_R: f64 = 1.0 / 3.0;
pub const FG_DELTA: usize = 9;

/// How the block lengths `ℓ_1 >= ... >= ℓ_m` are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockRule {
    /// `m = max{n : Σ_{i<=n} ⌊(δ−1)δ^{−i}(d + log_δ d + 3)⌋ < d}`, lengths
    /// from the same floors and the last block taking the remainder. Only
    /// satisfies `ℓ_i >= δ ℓ_{i+1}` for very large `d`.
    Floors,
    /// `ℓ_i = ⌊(δ−1) d / δ^i⌋` for `i >= 2` while positive and `ℓ_1` takes the
    /// remainder, which keeps `ℓ_i >= δ ℓ_{i+1}` at every `d`.
    Geometric,
}

/// Block lengths under `rule`.
pub fn block_lengths(d: usize, rule: BlockRule) -> Result<Vec<usize>> {
    let delta = FG_DELTA as f64;
    let lengths = match rule {
        BlockRule::Floors => {
            let base = d as f64 + (d as f64).ln() / delta.ln() + 3.0;
            let term = |i: i32| ((delta - 1.0) / delta.powi(i) * base).floor() as usize;
            let mut m = 0;
            let mut partial = 0usize;
            loop {
                let t = term(m + 1);
                if t == 0 || partial + t >= d {
                    break;
                }
                partial += t;
                m += 1;
            }
            // The m-th block is the remainder; with m = 0 nothing fits.
            if m == 0 {
                return Err(Error::Prior(format!(
                    "no admissible block count for d = {d}"
                )));
            }
            let mut l: Vec<usize> = (1..m).map(term).collect();
            l.push(d - l.iter().sum::<usize>());
            l
        }
        BlockRule::Geometric => {
            let top = (FG_DELTA - 1) * d;
            let mut tail = Vec::new();
            let mut p = FG_DELTA * FG_DELTA;
            while top / p >= 1 {
                tail.push(top / p);
                p = p.saturating_mul(FG_DELTA);
            }
            let rest: usize = tail.iter().sum();
            if rest >= d {
                return Err(Error::Prior(format!("geometric blocks overflow d = {d}")));
            }
            let mut l = vec![d - rest];
            l.extend(tail);
            l
        }
    };
    Ok(lengths)
}

/// A built `F·G` construction with its support validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneFg {
    pub d: usize,
    pub m: usize,
    pub lengths: Vec<usize>,
    pub s: usize,
    pub r: f64,
    pub delta: usize,
    pub centered: bool,
    pub rule: BlockRule,
    /// Global factor applied to centered samples so that every support
    /// point has norm at least 1 (1 when uncentered).
    pub scale: f64,
}

fn supports(m: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(s);
    fn rec(start: usize, m: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for j in start..m {
            cur.push(j);
            rec(j + 1, m, s, cur, out);
            cur.pop();
        }
    }
    rec(0, m, s, &mut cur, &mut out);
    out
}

impl MonotoneFg {
    /// Build with the geometric block rule.
    pub fn build(d: usize, centered: bool) -> Result<Self> {
        Self::build_with_rule(d, centered, BlockRule::Geometric)
    }

    pub fn build_with_rule(d: usize, centered: bool, rule: BlockRule) -> Result<Self> {
        let lengths = block_lengths(d, rule)?;
        let m = lengths.len();
        if m < 1 {
            return Err(Error::Prior(format!("m < 1 at d = {d}")));
        }
        if let Some(i) = lengths.windows(2).position(|w| w[0] < FG_DELTA * w[1]) {
            return Err(Error::Prior(format!(
                "block condition l_{} >= {} l_{} fails at d = {d}, m = {m} (lengths {lengths:?})",
                i + 1,
                FG_DELTA,
                i + 2
            )));
        }
        let s = sparsity(m);
        let mut fg = Self {
            d,
            m,
            lengths,
            s,
            r: FG_R,
            delta: FG_DELTA,
            centered,
            rule,
            scale: 1.0,
        };
        if centered {
            let min_norm = fg
                .all_supports_raw()
                .iter()
                .map(|e| norm(e))
                .fold(f64::INFINITY, f64::min);
            if !(min_norm > 0.0) {
                return Err(Error::Prior(format!(
                    "centered support collapses to 0 at d = {d}, m = {m}"
                )));
            }
            fg.scale = (1.0 / min_norm).max(1.0);
        }
        for eta in fg.all_supports() {
            fg.check(&eta)?;
        }
        Ok(fg)
    }

    /// The `m × m` matrix `G`.
    pub fn g_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.m, self.m, |i, j| {
            if i >= j {
                self.r.powi((i - j) as i32)
            } else {
                0.0
            }
        })
    }

    /// The `d × m` matrix `F`.
    pub fn f_matrix(&self) -> DMatrix<f64> {
        let mut f = DMatrix::zeros(self.d, self.m);
        let mut row = 0;
        for (j, &l) in self.lengths.iter().enumerate() {
            let v = 1.0 / (l as f64).sqrt();
            for i in row..row + l {
                f[(i, j)] = v;
            }
            row += l;
        }
        f
    }

    /// `G b` for the support `idx`.
    pub fn gb(&self, idx: &[usize]) -> Vec<f64> {
        let v = 1.0 / (self.s as f64).sqrt();
        let mut b = vec![0.0; self.m];
        for &j in idx {
            b[j] = v;
        }
        let mut x = vec![0.0; self.m];
        let mut acc = 0.0;
        for j in 0..self.m {
            acc = self.r * acc + b[j];
            x[j] = acc;
        }
        x
    }

    /// `η` for a support, centered but not yet rescaled.
    fn raw_eta(&self, idx: &[usize]) -> Vec<f64> {
        let x = self.gb(idx);
        let mut eta = Vec::with_capacity(self.d);
        for (j, &l) in self.lengths.iter().enumerate() {
            let u = x[j] / (l as f64).sqrt();
            eta.extend(std::iter::repeat_n(u, l));
        }
        if self.centered {
            let mean = eta.iter().sum::<f64>() / self.d as f64;
            eta.iter_mut().for_each(|v| *v -= mean);
        }
        eta
    }

    pub fn eta(&self, idx: &[usize]) -> Vec<f64> {
        let mut eta = self.raw_eta(idx);
        if self.scale != 1.0 {
            eta.iter_mut().for_each(|v| *v *= self.scale);
        }
        eta
    }

    fn all_supports_raw(&self) -> Vec<Vec<f64>> {
        supports(self.m, self.s)
            .iter()
            .map(|idx| self.raw_eta(idx))
            .collect()
    }

    /// `η` for every support, in lexicographic support order.
    pub fn all_supports(&self) -> Vec<Vec<f64>> {
        supports(self.m, self.s)
            .iter()
            .map(|idx| self.eta(idx))
            .collect()
    }

    /// Every `η` is exactly nondecreasing and has norm at least 1.
    pub fn check(&self, eta: &[f64]) -> Result<()> {
        if let Some(i) = eta.windows(2).position(|w| !(w[0] <= w[1])) {
            return Err(Error::Prior(format!(
                "sample not nondecreasing at index {} (d = {}, m = {})",
                i + 1,
                self.d,
                self.m
            )));
        }
        let n = norm(eta);
        if n < 1.0 - 1e-12 {
            return Err(Error::Prior(format!(
                "sample norm {n} < 1 (d = {}, m = {})",
                self.d, self.m
            )));
        }
        Ok(())
    }

    /// One validated sample.
    pub fn sample(&self, stream: &RngStream) -> Result<Vec<f64>> {
        let mut rng = stream.rng();
        let mut idx: Vec<usize> = sample(&mut rng, self.m, self.s).into_vec();
        idx.sort_unstable();
        let eta = self.eta(&idx);
        self.check(&eta)?;
        Ok(eta)
    }

    /// `E exp(λ⟨η,η'⟩)` by enumerating every ordered pair of supports.
    pub fn exact_moment(&self, lambda: f64) -> f64 {
        let etas = self.all_supports();
        let mut terms = Vec::with_capacity(etas.len() * etas.len());
        for a in &etas {
            for b in &etas {
                terms.push(lambda * dot(a, b));
            }
        }
        (crate::vecops::log_sum_exp(&terms) - (terms.len() as f64).ln()).exp()
    }
}
