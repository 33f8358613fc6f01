//! Crate-wide error type.

/// Errors produced by state construction, spectral integration, counting
/// statistics, and file parsing.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A matrix failed the density-matrix validity checks.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A spectral density was expected to have unit area but does not.
    #[error("spectrum not normalized: integral = {integral}")]
    Normalization { integral: f64 },

    /// A wavelength grid clipped too much of a model spectrum.
    #[error("grid truncates spectrum: captured integral {integral} < 0.999")]
    Truncation { integral: f64 },

    /// A correlation estimate was requested from a record with zero total counts.
    #[error("correlation undefined: zero total coincidences")]
    UndefinedCorrelation,

    /// A numeric input fell outside its allowed range.
    #[error("{context}: {value} outside [{min}, {max}]")]
    OutOfRange {
        context: String,
        value: f64,
        min: f64,
        max: f64,
    },

    /// A data file could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn invalid_state(msg: impl Into<String>) -> Self {
        Error::InvalidState(msg.into())
    }

    pub(crate) fn out_of_range(context: impl Into<String>, value: f64, min: f64, max: f64) -> Self {
        Error::OutOfRange {
            context: context.into(),
            value,
            min,
            max,
        }
    }
}
