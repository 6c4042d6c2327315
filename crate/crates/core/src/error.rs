use thiserror::Error;

/// Errors raised by the signal chain and the two adaptation algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    /// LMS weights left the bounded region; usually the step size is too large.
    #[error("LMS diverged at sample {index}: a weight magnitude exceeded {threshold:e}")]
    Diverged { index: usize, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
