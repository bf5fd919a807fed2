use std::io;

use thiserror::Error;

/// Errors produced anywhere in the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("could not draw a nonsingular mixing matrix in {attempts} attempts")]
    DegenerateMatrix { attempts: usize },

    #[error("LP solver failed after {iterations} iterations: {reason}")]
    SolverFailure { iterations: usize, reason: String },

    #[error("sample row {row} lies outside the span of the centroid body")]
    DegenerateSampleSpan { row: usize },

    #[error("scatter matrix is singular (smallest eigenvalue {min_eigenvalue:e})")]
    SingularScatter { min_eigenvalue: f64 },

    #[error("sample covariance is singular (smallest eigenvalue {min_eigenvalue:e})")]
    SingularInput { min_eigenvalue: f64 },

    #[error(
        "cannot reach acceptance {target} within radius bracket [{lo_fraction}, {hi_fraction}]"
    )]
    UnDampable {
        target: f64,
        lo_fraction: f64,
        hi_fraction: f64,
    },

    #[error("damping rejected every sample (radius {radius})")]
    EmptyOutput { radius: f64 },

    #[error("FastICA did not converge after {restarts} restarts (converged flags {converged:?})")]
    Unconverged {
        restarts: usize,
        converged: Vec<bool>,
    },

    #[error("result table is empty")]
    EmptyTable,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for failures caused by the numbers rather than by how the
    /// library was called.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateMatrix { .. }
                | Error::SolverFailure { .. }
                | Error::DegenerateSampleSpan { .. }
                | Error::SingularScatter { .. }
                | Error::SingularInput { .. }
                | Error::UnDampable { .. }
                | Error::EmptyOutput { .. }
                | Error::Unconverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
