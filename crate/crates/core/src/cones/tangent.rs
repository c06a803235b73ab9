//! Tangent cone of the monotone cone at a point.

use super::{constant_pieces, ConeDescriptor};
use crate::error::{Error, Result};

/// `T_M(θ₀) = M_{d₁} × ... × M_{d_k}` together with its block lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentCone {
    pub cone: ConeDescriptor,
    pub pieces: Vec<usize>,
}

impl TangentCone {
    /// Number of constant pieces `k(θ₀)`.
    pub fn k(&self) -> usize {
        self.pieces.len()
    }
}

/// Tangent cone of `M` at a nondecreasing `θ₀`. Pieces use exact equality.
pub fn tangent_cone_monotone(theta0: &[f64]) -> Result<TangentCone> {
    if theta0.is_empty() {
        return Err(Error::InvalidCone("theta0 is empty".into()));
    }
    if let Some(i) = theta0.windows(2).position(|w| !(w[0] <= w[1])) {
        return Err(Error::NotMonotone { index: i + 1 });
    }
    let pieces = constant_pieces(theta0);
    let components = pieces
        .iter()
        .map(|&l| ConeDescriptor::monotone(l))
        .collect::<Result<Vec<_>>>()?;
    Ok(TangentCone {
        cone: ConeDescriptor::product(components)?,
        pieces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block_dims(t: &TangentCone) -> Vec<usize> {
        match &t.cone {
            ConeDescriptor::Product { components } => components
                .iter()
                .map(|c| match c {
                    ConeDescriptor::Monotone { dim } => *dim,
                    other => panic!("unexpected component {other:?}"),
                })
                .collect(),
            other => panic!("unexpected cone {other:?}"),
        }
    }

    #[test]
    fn examples() {
        let t = tangent_cone_monotone(&[0.0; 4]).unwrap();
        assert_eq!((block_dims(&t), t.k()), (vec![4], 1));
        let t = tangent_cone_monotone(&[1.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!((block_dims(&t), t.k()), (vec![2, 2], 2));
        let t = tangent_cone_monotone(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((block_dims(&t), t.k()), (vec![1, 1, 1], 3));
    }

    #[test]
    fn rejects_decreasing_input() {
        assert!(matches!(
            tangent_cone_monotone(&[1.0, 3.0, 2.0]),
            Err(Error::NotMonotone { index: 2 })
        ));
    }

    #[test]
    fn strictly_increasing_gives_whole_space() {
        let t = tangent_cone_monotone(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            t.cone.project(&[3.0, -1.0, 2.0]).unwrap(),
            vec![3.0, -1.0, 2.0]
        );
    }
}
