//! Trapped-mode certification for periodically obstructed planar waveguides.
//!
//! The domain is a horizontal strip of height `2N` containing `N` identical
//! thin obstacles (or `N - 1` midline segments) placed periodically in the
//! transverse direction, all symmetric about the vertical line `x = 0`.
//! Separating the transverse symmetry classes turns the question "does the
//! Laplacian have an eigenvalue below the essential spectrum?" into `N`
//! independent scalar problems, one per class, each with its own threshold.
//!
//! Two independent routes answer that question here:
//!
//! * [`variational`] builds an explicit test function per class, evaluates
//!   its Rayleigh quotient both in closed form and by adaptive quadrature,
//!   and optimizes the free parameters until the quotient drops below the
//!   class threshold. A successful run is a certificate: the quotient value
//!   is a rigorous upper bound for the lowest eigenvalue in that class.
//! * [`fdsolver`] discretizes the full domain with a symmetry-respecting
//!   finite-volume scheme, restricts the eigensolver to one symmetry class
//!   at a time, and reports discrete eigenvalues together with classification
//!   fractions and measured decay rates.
//!
//! The two routes share nothing beyond the geometry types, so agreement
//! between them is a meaningful cross-check rather than a tautology.

pub mod error;
pub mod fdsolver;
pub mod geometry;
pub mod optimize;
pub mod quad;
pub mod symmetry;
pub mod testfun;
pub mod variational;

pub use error::{Error, Result};
