//! Exact coefficient rings, truncated Laurent series, high-precision
//! fixed-point numerics, and rational reconstruction.

pub mod float;
pub mod reconstruct;
pub mod scalar;
pub mod series;

pub use float::{cos_sin, pi, q_parameter, Complex, Real};
pub use reconstruct::rational_reconstruct;
pub use scalar::{Cyclotomic, Rat, Residue, Scalar};
pub use series::LaurentSeries;
