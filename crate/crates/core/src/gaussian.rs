//! Reproducible Gaussian sampling and Monte Carlo estimation.
//!
//! Every random draw is addressed by a `(seed, stream_id)` pair. The
//! generator is ChaCha8 keyed by the seed with the ChaCha stream counter
//! set to `stream_id`, so replicate `i` of an estimate always sees the same
//! numbers no matter how replicates are scheduled or sharded. Normal
//! variates use the ziggurat transform from `rand_distr::StandardNormal`.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Address of one independent random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Mixes a label into a seed so that unrelated tasks sharing one user seed
/// get unrelated key material (splitmix64 finalizer).
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fill_std_gaussian<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for x in out.iter_mut() {
        *x = rng.sample(StandardNormal);
    }
}

pub fn sample_std_gaussian(d: usize, stream: &RngStream) -> Vec<f64> {
    let mut out = vec![0.0; d];
    fill_std_gaussian(&mut stream.rng(), &mut out);
    out
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
}

impl McEstimate {
    /// Sample mean and `sd / √n` of replicate values, reduced in index order.
    pub fn from_values(values: &[f64], seed: u64) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "a Monte Carlo estimate needs at least 2 replicates, got {n}"
            )));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        Ok(Self {
            mean,
            stderr: sd / (n as f64).sqrt(),
            n,
            seed,
        })
    }

    /// Estimate of a probability from a count of successes.
    pub fn proportion(successes: usize, n: usize, seed: u64) -> Self {
        let p = successes as f64 / n as f64;
        let stderr = if n > 1 {
            (p * (1.0 - p) / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean: p,
            stderr,
            n,
            seed,
        }
    }

    /// `|mean - target| <= k * stderr`
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

/// Evaluates `f` on replicates `range` of `N(0, I_d)`; replicate `i` uses
/// stream `i`, so concatenating shards reproduces the full run exactly.
pub fn replicate_values<F>(f: F, d: usize, range: Range<usize>, seed: u64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut g = vec![0.0; d];
    range
        .map(|i| {
            fill_std_gaussian(&mut RngStream::new(seed, i as u64).rng(), &mut g);
            f(&g)
        })
        .collect()
}

pub fn mc_estimate<F>(f: F, d: usize, n: usize, seed: u64) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "mc_estimate needs n >= 2, got {n}"
        )));
    }
    McEstimate::from_values(&replicate_values(f, d, 0..n, seed), seed)
}

/// Calls `f(i, g)` for each replicate with a reused buffer.
pub fn for_each_replicate<F>(d: usize, n: usize, seed: u64, mut f: F)
where
    F: FnMut(usize, &[f64]),
{
    let mut g = vec![0.0; d];
    for i in 0..n {
        fill_std_gaussian(&mut RngStream::new(seed, i as u64).rng(), &mut g);
        f(i, &g);
    }
}

/// Like [`for_each_replicate`] but stops at the first error.
pub fn try_for_each_replicate<F>(d: usize, n: usize, seed: u64, mut f: F) -> Result<()>
where
    F: FnMut(usize, &[f64]) -> Result<()>,
{
    let mut g = vec![0.0; d];
    for i in 0..n {
        fill_std_gaussian(&mut RngStream::new(seed, i as u64).rng(), &mut g);
        f(i, &g)?;
    }
    Ok(())
}
