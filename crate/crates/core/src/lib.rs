//! Numerical verification toolkit for the fractional Hardy–Hénon equation
//!
//! ```text
//! (-Δ)^σ u = |x|^α u^p    in B_1 \ {0} ⊂ ℝⁿ
//! ```
//!
//! The crate evaluates the closed-form constants attached to the equation,
//! computes the fractional Laplacian of radial profiles by principal-value
//! quadrature, builds the Caffarelli–Silvestre extension in cylindrical
//! (Fowler) coordinates, evaluates the monotonicity energy and its derivative
//! identity, and classifies exponent regimes.

pub mod banded;
pub mod cli;
pub mod energy;
pub mod error;
pub mod extension;
pub mod fraclap;
pub mod kelvin;
pub mod params;
pub mod quadrature;
pub mod report;
pub mod specialfn;
pub mod suite;

pub use error::{Error, Result};
pub use params::{DerivedExponents, ProblemParams, RegimeLabel, RegimeVerdict, TheoremTag};
