use thiserror::Error;

use crate::groundstate::GroundStateReport;

/// Errors raised by the simulation library.
///
/// The variants fall into two classes that the command line front end maps to
/// distinct exit codes: invalid input ([`Error::Config`], [`Error::Domain`])
/// and numerical failure (everything else).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("imaginary-time propagation did not converge after {} iterations (residual {:.3e})", .report.iterations, .report.residual)]
    NotConverged { report: GroundStateReport },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("boundary density {density:.3e} exceeds {threshold:.1e} at t = {time:.5}; the spatial window is too small")]
    WindowTooSmall { time: f64, density: f64, threshold: f64 },

    #[error("grid of {points} points needs {bytes} bytes, above the configured cap of {cap} bytes")]
    MemoryBudget { points: usize, bytes: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { key: key.into(), message: message.into() }
    }

    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Domain(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
