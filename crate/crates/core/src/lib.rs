//! Spectral laboratory for the strongly damped wave equation
//! `u_tt − Δu_t − Δu + φ(u) = f` with Dirichlet conditions, and for the
//! constants that certify exponential attraction of its trajectories.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificates;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod nonlinearity;
pub mod semigroup;
pub mod spectral;

pub use error::{Error, Result};
pub use nonlinearity::PhiSpec;
pub use spectral::{ModeGrid, PhaseState, SpectralField, SpectralTransform};
