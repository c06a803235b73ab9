//! Geometry of cone-versus-cone Gaussian hypothesis testing.
//!
//! The crate provides Euclidean projections onto a fixed family of convex
//! cones ([`cones`]), seeded Monte Carlo primitives ([`gaussian`]),
//! estimators of Gaussian widths and related radii ([`geometry`]),
//! likelihood-ratio and truncation tests with empirical radius search
//! ([`testing`]), χ² lower bounds from explicit priors ([`lowerbound`]), and
//! an experiment registry used by the command-line tool ([`experiment`]).

pub mod cones;
pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod geometry;
pub mod lowerbound;
pub mod testing;
pub mod vecops;

pub use nalgebra;

pub use cones::{ConeDescriptor, ConeKind, ConePair, NonObliqueCertificate};
pub use error::{Error, Result};
pub use gaussian::{McEstimate, RngStream};
