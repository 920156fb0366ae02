//! Modular parametrizations of rational elliptic curves.
//!
//! The crate computes the coordinate functions (X(z), Y(z)) of a modular
//! parametrization as exact q-expansions at every cusp of Gamma_0(N), builds
//! modular polynomials to locate divisors and CM preimages of rational
//! points, and decides congruences between parametrizations of isogenous
//! curves through an explicit product formula and a Sturm-type bound for
//! meromorphic modular forms.

pub mod arith;
pub mod curve;
pub mod periods;
pub mod error;
pub mod gamma0;
pub mod congruence;
pub mod modpoly;
pub mod param;
pub mod surd;

pub use arith::{Complex, LaurentSeries, Rat, Real, Scalar};
