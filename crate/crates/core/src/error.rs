use thiserror::Error;

/// Errors raised by the simulator and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Two adjacent decision regions touch or overlap; the noise is too
    /// large for the requested alphabet size.
    #[error("calibration failure: regions for symbols {lower} and {upper} overlap")]
    CalibrationFailure { lower: usize, upper: usize },

    #[error("fit failure: {0}")]
    FitFailure(String),

    #[error("visibility undefined: sweep has no counts")]
    UndefinedVisibility,

    #[error("count ratio undefined: baseline mean is zero")]
    UndefinedRatio,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
