//! Exact skew-incidence diffraction by an anisotropic impedance right-angled
//! concave wedge.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod factorization;
pub mod numerics;
pub mod oracle_normal;
pub mod presets;
pub mod problem;
pub mod rhp_solver;
pub mod spectra;
pub mod spectral_matrix;
pub mod surface;

pub use error::{Error, Result};
