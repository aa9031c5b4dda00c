//! A pseudo-spectral laboratory for the massless cubic Dirac equation.
//!
//! The crate provides spinor algebra, periodic spectral grids, Fourier
//! multipliers adapted to the light cone, null-frame geometry, linear and
//! nonlinear evolution, discrete norm functionals and the numerical
//! experiments built on top of them.

// `!(x > 0.0)` is used on purpose so that NaN is rejected along with
// non-positive values; index loops mirror the component formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod data;
pub mod error;
pub mod estimates;
pub mod evolution;
pub mod experiments;
pub mod fit;
pub mod grid;
pub mod identities;
pub mod manifest;
pub mod multiplier;
pub mod norms;
pub mod null_frame;
pub mod registry;
pub mod report;
pub mod simulation;
pub mod spacetime;
pub mod spinor;

pub use error::{LabError, Result};
