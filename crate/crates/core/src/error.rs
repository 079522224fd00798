//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent arguments.
    #[error("argument error: {0}")]
    Argument(String),

    /// Linear system close to singular.
    #[error("near-singular linear system (condition estimate {cond:.3e})")]
    NearSingular { cond: f64 },

    /// Root bracketing or iteration failure.
    #[error("solver error: {0}")]
    Solver(String),

    /// Parameters fail a physical or configuration constraint.
    #[error("configuration error: {0}")]
    Config(String),

    /// Requested point lies in the excluded band around a regime boundary.
    #[error("regime boundary: {0}")]
    RegimeBoundary(String),

    /// The numerically observed v'(lambda) <= 0 somewhere on the scanned range.
    #[error("sound velocity not monotone: v'({lambda}) = {vprime}")]
    VelocityNotMonotone { lambda: f64, vprime: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
