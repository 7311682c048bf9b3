//! Exact construction and verification of special automorphisms of real
//! affine suspensions `X = {u·v = f}` and their iterated towers.

pub mod commands;
pub mod derivation;
pub mod error;
pub mod format;
pub mod geometry;
pub mod linalg;
pub mod polyring;
pub mod scalar;
pub mod tower;
pub mod transit;

pub use error::{Error, ErrorFamily, Result};
pub use scalar::Rational;

/// Polynomial with exact rational coefficients.
pub type Polynomial = polyring::Poly<Rational>;

pub type Derivation = derivation::Derivation<Rational>;
pub type FlowStep = derivation::FlowStep<Rational>;
pub type PolyEndomorphism = derivation::PolyEndomorphism<Rational>;
pub type AutomorphismScript = derivation::AutomorphismScript<Rational>;
