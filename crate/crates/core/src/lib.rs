//! Numerical toolkit for band-limited analysis on compact homogeneous
//! manifolds and for certified n-width bounds of Sobolev balls.

pub mod calibration;
pub mod error;
pub mod experiment;
pub mod homogeneous;
pub mod manifold;
pub mod quadrature;
pub mod sampling;
pub mod spectral;
pub mod widths;

pub use error::{Error, Result};
