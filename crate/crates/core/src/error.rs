//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failure modes of the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HardyError {
    /// Invalid dimensions, parameters, or condition combinations.
    #[error("configuration error: {0}")]
    Config(String),
    /// An argument lies outside the domain of the function being evaluated.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure did not reach its tolerance.
    #[error("numerical failure: {message} (best estimate {best:e}, error estimate {error:e})")]
    Numerical {
        message: String,
        best: f64,
        error: f64,
    },
    /// A user-supplied function returned a non-finite value.
    #[error("evaluation error at t = {at:e}: {message}")]
    Evaluation { at: f64, message: String },
}

impl HardyError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        HardyError::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        HardyError::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, best: f64, error: f64) -> Self {
        HardyError::Numerical {
            message: msg.into(),
            best,
            error,
        }
    }
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, HardyError>;
