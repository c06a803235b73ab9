//! Closed convex cones and their Euclidean projections.
//!
//! Every cone is described by a [`ConeDescriptor`]. Projections return a
//! `Result` because the generator and halfspace cones are solved
//! iteratively.

mod circular;
mod document;
mod dykstra;
mod nnls;
mod pair;
mod pava;
mod tangent;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::{sample_std_gaussian, RngStream};
use crate::vecops::{dist, dot, norm, norm_sq};

pub use circular::project_circular;
pub use dykstra::{project_halfspaces_dykstra, DYKSTRA_MAX_CYCLES, DYKSTRA_TOL};
pub use nnls::{nnls, NnlsSolution, NNLS_TOL};
pub use pair::{check_nonoblique, ConePair, NonObliqueCertificate};
pub use pava::{constant_pieces, project_monotone_pava};
pub use tangent::{tangent_cone_monotone, TangentCone};

/// Relative tolerance for membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Orthonormality tolerance for subspace bases.
pub const ORTHONORMAL_TOL: f64 = 1e-12;

/// The kind tag of a cone, as written in JSON documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeKind {
    Orthant,
    Monotone,
    Circular,
    Subspace,
    Ray,
    GeneratorCone,
    HalfspaceCone,
    Product,
    Induced,
}

impl ConeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConeKind::Orthant => "orthant",
            ConeKind::Monotone => "monotone",
            ConeKind::Circular => "circular",
            ConeKind::Subspace => "subspace",
            ConeKind::Ray => "ray",
            ConeKind::GeneratorCone => "generator-cone",
            ConeKind::HalfspaceCone => "halfspace-cone",
            ConeKind::Product => "product",
            ConeKind::Induced => "induced",
        }
    }
}

impl std::fmt::Display for ConeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A closed convex cone in `R^d`.
///
/// Variants are public so callers can match on them, but they should be
/// built through the checked constructors (or [`ConeDescriptor::validate`]d)
/// because projections assume well-formed parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ConeDescriptor {
    /// `{x : x_i >= 0}`.
    Orthant { dim: usize },
    /// `{x : x_1 <= ... <= x_d}`.
    Monotone { dim: usize },
    /// `{x : x_1 >= ‖x‖ cos α}`.
    Circular { dim: usize, alpha: f64 },
    /// Column span of a `dim × k` orthonormal basis; `k = 0` is `{0}`.
    Subspace { dim: usize, basis: DMatrix<f64> },
    /// `{t γ : t >= 0}`.
    Ray { direction: Vec<f64> },
    /// `{X β : β >= 0}` for an `n × p` generator matrix.
    Generator { generators: DMatrix<f64> },
    /// `{x : A x <= 0}` for an `m × d` constraint matrix.
    Halfspace { constraints: DMatrix<f64> },
    /// Cartesian product in the listed order.
    Product { components: Vec<ConeDescriptor> },
    /// `C₂ ∩ C₁*` for a non-oblique pair.
    Induced(Box<ConePair>),
}

impl ConeDescriptor {
    pub fn orthant(dim: usize) -> Result<Self> {
        Self::Orthant { dim }.validated()
    }

    pub fn monotone(dim: usize) -> Result<Self> {
        Self::Monotone { dim }.validated()
    }

    pub fn circular(dim: usize, alpha: f64) -> Result<Self> {
        Self::Circular { dim, alpha }.validated()
    }

    pub fn subspace(basis: DMatrix<f64>) -> Result<Self> {
        Self::Subspace {
            dim: basis.nrows(),
            basis,
        }
        .validated()
    }

    /// The trivial cone `{0}` in `R^dim`.
    pub fn zero(dim: usize) -> Result<Self> {
        Self::Subspace {
            dim,
            basis: DMatrix::zeros(dim, 0),
        }
        .validated()
    }

    /// All of `R^dim`.
    pub fn whole_space(dim: usize) -> Result<Self> {
        Self::Subspace {
            dim,
            basis: DMatrix::identity(dim, dim),
        }
        .validated()
    }

    /// The line `span(1)`.
    pub fn constants(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidCone("dim must be at least 1".into()));
        }
        let v = 1.0 / (dim as f64).sqrt();
        Self::subspace(DMatrix::from_element(dim, 1, v))
    }

    /// A uniformly random `k`-dimensional subspace of `R^dim`.
    pub fn random_subspace(dim: usize, k: usize, seed: u64) -> Result<Self> {
        if k > dim {
            return Err(Error::InvalidCone(format!(
                "subspace rank {k} exceeds dim {dim}"
            )));
        }
        let raw = sample_std_gaussian(dim * k, &RngStream::new(seed, 0));
        let q = DMatrix::from_column_slice(dim, k, &raw).qr().q();
        Self::subspace(q.columns(0, k).into_owned())
    }

    pub fn ray(direction: Vec<f64>) -> Result<Self> {
        Self::Ray { direction }.validated()
    }

    pub fn generator(generators: DMatrix<f64>) -> Result<Self> {
        Self::Generator { generators }.validated()
    }

    pub fn halfspace(constraints: DMatrix<f64>) -> Result<Self> {
        Self::Halfspace { constraints }.validated()
    }

    pub fn product(components: Vec<ConeDescriptor>) -> Result<Self> {
        Self::Product { components }.validated()
    }

    pub fn induced(pair: ConePair) -> Result<Self> {
        Self::Induced(Box::new(pair)).validated()
    }

    /// The monotone cone written as `{x : x_i − x_{i+1} <= 0}`.
    pub fn monotone_constraints(dim: usize) -> DMatrix<f64> {
        let rows = dim.saturating_sub(1);
        let mut a = DMatrix::zeros(rows, dim);
        for i in 0..rows {
            a[(i, i)] = 1.0;
            a[(i, i + 1)] = -1.0;
        }
        a
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Check the structural invariants of the descriptor.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidCone(msg));
        if self.dim() == 0 {
            return bad(format!("{} cone has dimension 0", self.kind()));
        }
        match self {
            Self::Orthant { .. } | Self::Monotone { .. } => Ok(()),
            Self::Circular { dim, alpha } => {
                if *dim < 2 {
                    return bad("circular cone needs dim >= 2".into());
                }
                if !(alpha.is_finite() && *alpha > 0.0 && *alpha < std::f64::consts::FRAC_PI_2) {
                    return bad(format!("circular angle {alpha} outside (0, pi/2)"));
                }
                Ok(())
            }
            Self::Subspace { dim, basis } => {
                if basis.nrows() != *dim {
                    return bad(format!("basis has {} rows, expected {dim}", basis.nrows()));
                }
                let gram = basis.transpose() * basis;
                let k = basis.ncols();
                let err = (gram - DMatrix::<f64>::identity(k, k)).amax();
                if !(err <= ORTHONORMAL_TOL) {
                    return bad(format!("basis is not orthonormal (max Gram error {err:e})"));
                }
                Ok(())
            }
            Self::Ray { direction } => {
                let n = norm(direction);
                if !(n.is_finite() && n > 0.0) {
                    return bad("ray direction must be finite and nonzero".into());
                }
                Ok(())
            }
            Self::Generator { generators } => {
                if generators.ncols() == 0 || !generators.iter().all(|v| v.is_finite()) {
                    return bad("generator matrix must be finite with at least one column".into());
                }
                if generators.amax() == 0.0 {
                    return bad("generator matrix is zero".into());
                }
                Ok(())
            }
            Self::Halfspace { constraints } => {
                if !constraints.iter().all(|v| v.is_finite()) {
                    return bad("constraint matrix must be finite".into());
                }
                if constraints.row_iter().any(|r| r.amax() == 0.0) {
                    return bad("constraint matrix has a zero row".into());
                }
                Ok(())
            }
            Self::Product { components } => {
                if components.is_empty() {
                    return bad("product needs at least one component".into());
                }
                components.iter().try_for_each(|c| c.validate())
            }
            Self::Induced(pair) => pair.validate(),
        }
    }

    pub fn kind(&self) -> ConeKind {
        match self {
            Self::Orthant { .. } => ConeKind::Orthant,
            Self::Monotone { .. } => ConeKind::Monotone,
            Self::Circular { .. } => ConeKind::Circular,
            Self::Subspace { .. } => ConeKind::Subspace,
            Self::Ray { .. } => ConeKind::Ray,
            Self::Generator { .. } => ConeKind::GeneratorCone,
            Self::Halfspace { .. } => ConeKind::HalfspaceCone,
            Self::Product { .. } => ConeKind::Product,
            Self::Induced(_) => ConeKind::Induced,
        }
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        match self {
            Self::Orthant { dim } | Self::Monotone { dim } => *dim,
            Self::Circular { dim, .. } | Self::Subspace { dim, .. } => *dim,
            Self::Ray { direction } => direction.len(),
            Self::Generator { generators } => generators.nrows(),
            Self::Halfspace { constraints } => constraints.ncols(),
            Self::Product { components } => components.iter().map(|c| c.dim()).sum(),
            Self::Induced(pair) => pair.dim(),
        }
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Euclidean projection `Π_C(x)`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        Ok(match self {
            Self::Orthant { .. } => x.iter().map(|v| v.max(0.0)).collect(),
            Self::Monotone { .. } => project_monotone_pava(x),
            Self::Circular { alpha, .. } => project_circular(*alpha, x),
            Self::Subspace { basis, .. } => project_subspace(basis, x),
            Self::Ray { direction } => {
                let c = dot(x, direction).max(0.0) / norm_sq(direction);
                direction.iter().map(|g| c * g).collect()
            }
            Self::Generator { generators } => nnls(generators, x)?.fitted,
            Self::Halfspace { constraints } => {
                // Moreau: the polar of {Ax <= 0} is generated by the rows of A.
                let polar = nnls(&constraints.transpose(), x)?.fitted;
                x.iter().zip(&polar).map(|(a, b)| a - b).collect()
            }
            Self::Product { components } => {
                let mut out = Vec::with_capacity(x.len());
                let mut offset = 0;
                for c in components {
                    let k = c.dim();
                    out.extend(c.project(&x[offset..offset + k])?);
                    offset += k;
                }
                out
            }
            Self::Induced(pair) => pair.project_induced(x)?,
        })
    }

    /// Projection onto the polar cone, `x − Π_C(x)`.
    pub fn polar_project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.project(x)?;
        Ok(x.iter().zip(&p).map(|(a, b)| a - b).collect())
    }

    /// Distance from `x` to the cone.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        Ok(dist(x, &self.project(x)?))
    }

    /// Membership up to `MEMBERSHIP_TOL · ‖x‖`, plus a rounding floor of
    /// `1e-15 · √d` so that vectors made of cancellation residue still count.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        let floor = 1e-15 * (x.len() as f64).sqrt();
        Ok(self.distance(x)? <= MEMBERSHIP_TOL * norm(x) + floor)
    }

    /// The components of a product cone, or the cone itself.
    pub fn blocks(&self) -> Vec<&ConeDescriptor> {
        match self {
            Self::Product { components } => components.iter().collect(),
            other => vec![other],
        }
    }
}

fn project_subspace(basis: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let (d, k) = basis.shape();
    let mut out = vec![0.0; d];
    for j in 0..k {
        let col = basis.column(j);
        let c: f64 = col.iter().zip(x).map(|(a, b)| a * b).sum();
        for (o, b) in out.iter_mut().zip(col.iter()) {
            *o += c * b;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn basic_projections() {
        let o = ConeDescriptor::orthant(3).unwrap();
        assert_eq!(o.project(&[1.0, -2.0, 3.0]).unwrap(), vec![1.0, 0.0, 3.0]);
        let m = ConeDescriptor::monotone(2).unwrap();
        assert_eq!(m.project(&[2.0, 1.0]).unwrap(), vec![1.5, 1.5]);
        let c = ConeDescriptor::circular(3, FRAC_PI_4).unwrap();
        assert!(close(
            &c.project(&[0.0, 1.0, 0.0]).unwrap(),
            &[0.5, 0.5, 0.0],
            1e-12
        ));
    }

    #[test]
    fn generator_examples() {
        let g = ConeDescriptor::generator(DMatrix::identity(3, 3)).unwrap();
        assert!(close(
            &g.project(&[1.0, -2.0, 3.0]).unwrap(),
            &[1.0, 0.0, 3.0],
            1e-12
        ));
        let g = ConeDescriptor::generator(DMatrix::from_column_slice(2, 1, &[1.0, 1.0])).unwrap();
        assert!(close(&g.project(&[2.0, 0.0]).unwrap(), &[1.0, 1.0], 1e-12));
    }

    #[test]
    fn generator_matches_dykstra_on_dual_description() {
        // cone{(1,0),(1,1)} = {x : x_2 >= 0, x_1 − x_2 >= 0}, i.e. A = [[0,−1],[−1,1]].
        let x = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        let g = ConeDescriptor::generator(x).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 1.0]);
        let via_nnls = g.project(&[-1.0, 2.0]).unwrap();
        let via_dykstra = project_halfspaces_dykstra(&a, &[-1.0, 2.0]).unwrap();
        assert!(
            close(&via_nnls, &via_dykstra, 1e-8),
            "{via_nnls:?} vs {via_dykstra:?}"
        );
        assert!(close(&via_nnls, &[0.5, 0.5], 1e-12));
    }

    #[test]
    fn halfspace_examples() {
        let h = ConeDescriptor::halfspace(DMatrix::from_row_slice(1, 2, &[1.0, -1.0])).unwrap();
        assert!(close(&h.project(&[2.0, 1.0]).unwrap(), &[1.5, 1.5], 1e-12));
        let h = ConeDescriptor::halfspace(-DMatrix::<f64>::identity(2, 2)).unwrap();
        assert!(close(&h.project(&[-1.0, 2.0]).unwrap(), &[0.0, 2.0], 1e-12));
        let dy =
            project_halfspaces_dykstra(&(-DMatrix::<f64>::identity(2, 2)), &[-1.0, 2.0]).unwrap();
        assert!(close(&dy, &[0.0, 2.0], 1e-12));
    }

    #[test]
    fn product_examples() {
        let p = ConeDescriptor::product(vec![
            ConeDescriptor::orthant(2).unwrap(),
            ConeDescriptor::whole_space(1).unwrap(),
        ])
        .unwrap();
        assert_eq!(p.project(&[-1.0, 2.0, -5.0]).unwrap(), vec![0.0, 2.0, -5.0]);
        let p = ConeDescriptor::product(vec![
            ConeDescriptor::monotone(2).unwrap(),
            ConeDescriptor::monotone(2).unwrap(),
        ])
        .unwrap();
        assert_eq!(
            p.project(&[2.0, 1.0, 4.0, 0.0]).unwrap(),
            vec![1.5, 1.5, 2.0, 2.0]
        );
        let p = ConeDescriptor::product(vec![
            ConeDescriptor::circular(3, FRAC_PI_4).unwrap(),
            ConeDescriptor::whole_space(1).unwrap(),
        ])
        .unwrap();
        assert!(close(
            &p.project(&[0.0, 3.0, 4.0, -7.0]).unwrap(),
            &[2.5, 1.5, 2.0, -7.0],
            1e-12
        ));
    }

    #[test]
    fn polar_examples() {
        let o = ConeDescriptor::orthant(2).unwrap();
        assert_eq!(o.polar_project(&[1.0, -2.0]).unwrap(), vec![0.0, -2.0]);
        let c = ConeDescriptor::circular(3, FRAC_PI_4).unwrap();
        assert!(close(
            &c.polar_project(&[0.0, 3.0, 4.0]).unwrap(),
            &[-2.5, 1.5, 2.0],
            1e-12
        ));
        let s = ConeDescriptor::constants(3).unwrap();
        assert!(close(
            &s.polar_project(&[1.0, 2.0, 6.0]).unwrap(),
            &[-2.0, -1.0, 3.0],
            1e-12
        ));
    }

    #[test]
    fn zero_cone_and_membership() {
        let z = ConeDescriptor::zero(3).unwrap();
        assert_eq!(z.project(&[1.0, 2.0, 3.0]).unwrap(), vec![0.0; 3]);
        assert!(z.contains(&[0.0; 3]).unwrap());
        let o = ConeDescriptor::orthant(2).unwrap();
        assert!(o.contains(&[3.0, 0.0]).unwrap());
        assert!(!o.contains(&[3.0, -1e-3]).unwrap());
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert!(ConeDescriptor::orthant(0).is_err());
        assert!(ConeDescriptor::circular(3, 0.0).is_err());
        assert!(ConeDescriptor::circular(3, 2.0).is_err());
        assert!(ConeDescriptor::circular(1, 0.5).is_err());
        assert!(ConeDescriptor::ray(vec![0.0, 0.0]).is_err());
        assert!(ConeDescriptor::subspace(DMatrix::from_element(2, 1, 1.0)).is_err());
        assert!(ConeDescriptor::product(vec![]).is_err());
        let o = ConeDescriptor::orthant(2).unwrap();
        assert!(matches!(
            o.project(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn random_subspace_is_orthonormal() {
        let s = ConeDescriptor::random_subspace(16, 8, 3).unwrap();
        assert_eq!(s.dim(), 16);
        assert_eq!(s, ConeDescriptor::random_subspace(16, 8, 3).unwrap());
    }
}
