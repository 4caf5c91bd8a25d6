use thiserror::Error;

/// Errors raised across the detection, coding and simulation stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("framing error: {0}")]
    Framing(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// Cavity (extrinsic) variance is not positive.
    #[error("invalid cavity: variance {0} is not positive")]
    InvalidCavity(f64),

    #[error("instance too large for exhaustive enumeration: {0} hypotheses")]
    InstanceTooLarge(f64),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
