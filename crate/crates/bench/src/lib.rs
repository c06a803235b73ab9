//! Shared inputs for the criterion benchmarks.

use conetest::gaussian::{sample_std_gaussian, RngStream};

/// `count` standard Gaussian vectors of length `d`, one stream each.
pub fn gaussian_inputs(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| sample_std_gaussian(d, &RngStream::new(seed, i as u64)))
        .collect()
}
