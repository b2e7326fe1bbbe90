use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the diffraction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("quadrature did not converge: worst subinterval [{a}, {b}] with error estimate {err:e}")]
    NoConvergence { a: f64, b: f64, err: f64 },

    #[error("argument at or too close to a branch point: {0}")]
    BranchPoint(String),

    #[error("phase unwrapping failed: {0}")]
    Phase(String),

    #[error("singular point: {0}")]
    Singular(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("Jacobi inversion failed: candidates (m0, n0) = {candidates:?}")]
    Inversion { candidates: Vec<(f64, f64)> },

    #[error("evaluation at a pole {at}; residue {residue}")]
    Pole { at: Complex64, residue: Complex64 },

    #[error("linear system: {0}")]
    Linear(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
