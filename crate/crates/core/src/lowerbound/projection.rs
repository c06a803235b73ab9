//! The projection prior: `Π_K g / (W/2)` conditioned on `‖Π_K g‖ >= W/2`.

use crate::cones::ConeDescriptor;
use crate::error::{Error, Result};
use crate::gaussian::{fill_std_gaussian, try_for_each_replicate, McEstimate, RngStream};
use crate::vecops::norm;

/// Draw limit per sample before [`Error::AcceptanceStall`].
pub const MAX_ATTEMPTS: usize = 10_000;

/// One accepted sample and the number of draws it took.
pub fn sample_projection_prior(
    cone: &ConeDescriptor,
    width_estimate: f64,
    stream: &RngStream,
) -> Result<(Vec<f64>, usize)> {
    if !(width_estimate > 0.0 && width_estimate.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "width estimate must be positive, got {width_estimate}"
        )));
    }
    let half = width_estimate / 2.0;
    let mut rng = stream.rng();
    let mut g = vec![0.0; cone.dim()];
    for attempt in 1..=MAX_ATTEMPTS {
        fill_std_gaussian(&mut rng, &mut g);
        let p = cone.project(&g)?;
        if norm(&p) >= half {
            return Ok((p.iter().map(|v| v / half).collect(), attempt));
        }
    }
    Err(Error::AcceptanceStall {
        attempts: MAX_ATTEMPTS,
    })
}

/// Fraction of Gaussian draws with `‖Π_K g‖ >= W/2`.
pub fn projection_prior_acceptance(
    cone: &ConeDescriptor,
    width_estimate: f64,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    let mut hits = 0;
    try_for_each_replicate(cone.dim(), n, seed, |_, g| {
        if norm(&cone.project(g)?) >= width_estimate / 2.0 {
            hits += 1;
        }
        Ok(())
    })?;
    Ok(McEstimate::proportion(hits, n, seed))
}
