//! Nested cone pairs `C₁ ⊆ C₂` and the induced cone `K = C₂ ∩ C₁*`.

use serde::{Deserialize, Serialize};

use super::{ConeDescriptor, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::gaussian::{sample_std_gaussian, RngStream};
use crate::vecops::{dist, norm, norm_sq};

/// Evidence that `Π_{C₁} = Π_{C₁} ∘ Π_{C₂}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NonObliqueCertificate {
    /// Known analytically, e.g. one of the cones is a subspace.
    TrustedAnalytic,
    /// Verified on Gaussian samples.
    NumericallyChecked { samples: usize, max_residual: f64 },
    /// No evidence; induced projections are refused.
    Unchecked,
}

/// A nested pair of cones with a non-obliqueness certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct ConePair {
    pub inner: ConeDescriptor,
    pub outer: ConeDescriptor,
    pub certificate: NonObliqueCertificate,
}

impl ConePair {
    /// A pair whose non-obliqueness is known analytically.
    pub fn trusted(inner: ConeDescriptor, outer: ConeDescriptor) -> Result<Self> {
        Self::with_certificate(inner, outer, NonObliqueCertificate::TrustedAnalytic)
    }

    pub fn unchecked(inner: ConeDescriptor, outer: ConeDescriptor) -> Result<Self> {
        Self::with_certificate(inner, outer, NonObliqueCertificate::Unchecked)
    }

    /// Run [`check_nonoblique`] and attach the resulting certificate.
    pub fn checked(
        inner: ConeDescriptor,
        outer: ConeDescriptor,
        n_samples: usize,
        seed: u64,
        tol: f64,
    ) -> Result<Self> {
        let certificate = check_nonoblique(&inner, &outer, n_samples, seed, tol)?;
        Self::with_certificate(inner, outer, certificate)
    }

    pub fn with_certificate(
        inner: ConeDescriptor,
        outer: ConeDescriptor,
        certificate: NonObliqueCertificate,
    ) -> Result<Self> {
        let pair = Self {
            inner,
            outer,
            certificate,
        };
        pair.validate()?;
        Ok(pair)
    }

    /// `{0} ⊆ C`: the induced cone is `C` itself.
    pub fn zero_vs(outer: ConeDescriptor) -> Result<Self> {
        let inner = ConeDescriptor::zero(outer.dim())?;
        Self::trusted(inner, outer)
    }

    /// `span(1) ⊆ M`: testing constancy against monotonicity.
    pub fn constants_vs_monotone(dim: usize) -> Result<Self> {
        Self::trusted(
            ConeDescriptor::constants(dim)?,
            ConeDescriptor::monotone(dim)?,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.inner.validate()?;
        self.outer.validate()?;
        if self.inner.dim() != self.outer.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.outer.dim(),
                found: self.inner.dim(),
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.outer.dim()
    }

    pub fn is_certified(&self) -> bool {
        !matches!(self.certificate, NonObliqueCertificate::Unchecked)
    }

    /// `Π_K(x) = Π_{C₁*}(Π_{C₂} x)`, with `Π_{C₁*}(y) = y − Π_{C₁}(y)`.
    pub fn project_induced(&self, x: &[f64]) -> Result<Vec<f64>> {
        if !self.is_certified() {
            return Err(Error::UncertifiedPair);
        }
        let y = self.outer.project(x)?;
        let p = self.inner.project(&y)?;
        Ok(y.iter().zip(&p).map(|(a, b)| a - b).collect())
    }

    /// `‖Π_{C₂} y‖² − ‖Π_{C₁} y‖²`, the GLRT statistic without the
    /// Zarantonello shortcut.
    pub fn two_projection_statistic(&self, y: &[f64]) -> Result<f64> {
        Ok(norm_sq(&self.outer.project(y)?) - norm_sq(&self.inner.project(y)?))
    }
}

/// Sample-based check of nesting and non-obliqueness.
///
/// Draws `n_samples` standard Gaussian points `x` (replicate `i` on stream
/// `i`) and computes the largest residual `‖Π_{C₁}x − Π_{C₁}Π_{C₂}x‖`. Also
/// checks that `Π_{C₁}x` lies in `C₂`. Residuals are compared against
/// `tol · max(1, ‖x‖)`.
pub fn check_nonoblique(
    inner: &ConeDescriptor,
    outer: &ConeDescriptor,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<NonObliqueCertificate> {
    let d = outer.dim();
    if inner.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: inner.dim(),
        });
    }
    let mut max_residual = 0.0_f64;
    let mut max_nesting = 0.0_f64;
    for i in 0..n_samples {
        let x = sample_std_gaussian(d, &RngStream::new(seed, i as u64));
        let scale = norm(&x).max(1.0);
        let p1 = inner.project(&x)?;
        let p12 = inner.project(&outer.project(&x)?)?;
        max_residual = max_residual.max(dist(&p1, &p12) / scale);
        let nest = outer.distance(&p1)?;
        max_nesting = max_nesting.max(nest / norm(&p1).max(1.0));
    }
    if max_nesting > tol.max(MEMBERSHIP_TOL) {
        return Err(Error::NotNested {
            distance: max_nesting,
        });
    }
    if max_residual > tol {
        return Err(Error::Oblique {
            max_residual,
            samples: n_samples,
        });
    }
    Ok(NonObliqueCertificate::NumericallyChecked {
        samples: n_samples,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn induced_examples() {
        let p = ConePair::zero_vs(ConeDescriptor::orthant(2).unwrap()).unwrap();
        assert_eq!(p.project_induced(&[-1.0, 3.0]).unwrap(), vec![0.0, 3.0]);
        let p = ConePair::constants_vs_monotone(3).unwrap();
        let z = p.project_induced(&[3.0, 1.0, 2.0]).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-12));
        let z = p.project_induced(&[1.0, 2.0, 3.0]).unwrap();
        for (a, b) in z.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unchecked_pair_is_refused() {
        let p = ConePair::unchecked(
            ConeDescriptor::zero(2).unwrap(),
            ConeDescriptor::orthant(2).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            p.project_induced(&[1.0, 1.0]),
            Err(Error::UncertifiedPair)
        ));
    }

    #[test]
    fn zero_inner_passes_with_zero_residual() {
        let outer = ConeDescriptor::circular(5, 0.7).unwrap();
        let c = check_nonoblique(&ConeDescriptor::zero(5).unwrap(), &outer, 200, 1, 1e-10).unwrap();
        assert_eq!(
            c,
            NonObliqueCertificate::NumericallyChecked {
                samples: 200,
                max_residual: 0.0
            }
        );
    }

    #[test]
    fn constants_in_monotone_pass() {
        let c = check_nonoblique(
            &ConeDescriptor::constants(20).unwrap(),
            &ConeDescriptor::monotone(20).unwrap(),
            500,
            2,
            1e-10,
        )
        .unwrap();
        assert!(matches!(
            c,
            NonObliqueCertificate::NumericallyChecked { .. }
        ));
    }

    #[test]
    fn axis_ray_in_circular_cone_is_oblique() {
        // x = (0,1,0): Π_ray x = 0 but Π_C x = (1/2,1/2,0) and Π_ray of that is e₁/2.
        let ray = ConeDescriptor::ray(vec![1.0, 0.0, 0.0]).unwrap();
        let circ = ConeDescriptor::circular(3, FRAC_PI_4).unwrap();
        let direct = ray.project(&[0.0, 1.0, 0.0]).unwrap();
        let composed = ray
            .project(&circ.project(&[0.0, 1.0, 0.0]).unwrap())
            .unwrap();
        assert_eq!(direct, vec![0.0; 3]);
        assert!((composed[0] - 0.5).abs() < 1e-12);
        let r = check_nonoblique(&ray, &circ, 1000, 3, 1e-8);
        assert!(matches!(r, Err(Error::Oblique { .. })), "{r:?}");
    }

    #[test]
    fn non_nested_pair_is_reported() {
        let r = check_nonoblique(
            &ConeDescriptor::whole_space(3).unwrap(),
            &ConeDescriptor::orthant(3).unwrap(),
            50,
            4,
            1e-8,
        );
        assert!(matches!(r, Err(Error::NotNested { .. })));
    }
}
