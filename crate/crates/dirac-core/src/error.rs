//! Error type shared by every module of the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, LabError>;

/// Failure modes of the laboratory.
///
/// The variants follow the error classes named by the individual operations:
/// domain violations of preconditions, unrepresentable dyadic bands,
/// insufficient resolution, singular symbol divisions, numerical breakdown
/// of a time integration, configuration problems and I/O.
#[derive(Debug, Error)]
pub enum LabError {
    /// A precondition on the mathematical input was violated.
    #[error("domain error: {0}")]
    Domain(String),
    /// A dyadic parameter lies outside the band the grid can represent.
    #[error("range error: {0}")]
    Range(String),
    /// The discretisation is too coarse for the requested quantity.
    #[error("resolution error: {0}")]
    Resolution(String),
    /// A Fourier-side division would touch a (near) zero of the divisor.
    #[error("singular division: {what} (min |divisor| = {min_divisor:.3e}, threshold {threshold:.3e})")]
    SingularDivision {
        /// What was being divided.
        what: String,
        /// Smallest divisor encountered on the support.
        min_divisor: f64,
        /// Threshold that was required.
        threshold: f64,
    },
    /// A time integration produced non-finite values or left its resolved band.
    #[error("integration breakdown at t = {time}: {reason}")]
    Breakdown {
        /// Time of the last valid frame.
        time: f64,
        /// Human readable diagnostic.
        reason: String,
    },
    /// Shapes of two objects are incompatible.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// Invalid run configuration; `path` is the JSON path of the offending field.
    #[error("config error at {path}: {message}")]
    Config {
        /// JSON-pointer-like path of the field.
        path: String,
        /// Explanation.
        message: String,
    },
    /// Malformed binary or text file.
    #[error("format error: {0}")]
    Format(String),
    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// JSON (de)serialisation failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    /// CSV serialisation failure.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    /// Shorthand for [`LabError::Domain`].
    pub fn domain(msg: impl Into<String>) -> Self {
        LabError::Domain(msg.into())
    }

    /// Shorthand for [`LabError::Config`].
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Config { path: path.into(), message: message.into() }
    }
}
