use thiserror::Error;

/// Errors produced by the simulator and the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("theta = {theta} is outside the drift domain ({theta_min}, 1]")]
    Domain { theta: f64, theta_min: f64 },

    #[error("solver failed to converge: {0}")]
    SolverFailure(String),

    #[error("instance too large for exact enumeration: {0}")]
    TooLarge(String),

    #[error("chain is not reversible: detailed-balance residual {0:e}")]
    NotReversible(f64),

    #[error("representation mismatch: {0}")]
    RepresentationMismatch(String),

    #[error("component structures differ")]
    StructureMismatch,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
