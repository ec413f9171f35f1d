use thiserror::Error;

/// Errors raised by the engine. Each variant maps to a stable kind string.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("{0}")]
    RingMismatch(String),
    #[error("{0}")]
    NotInvertible(String),
    #[error("{0}")]
    NotSharp(String),
    #[error("{0}")]
    StabilityExhausted(String),
    #[error("{0}")]
    UnsupportedRing(String),
    #[error("{0}")]
    InexactDivision(String),
    #[error("{0}")]
    InternalConsistency(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) | Error::InvalidArgument(_) => "ParseError",
            Error::RingMismatch(_) => "RingMismatch",
            Error::NotInvertible(_) => "NotInvertible",
            Error::NotSharp(_) => "NotSharp",
            Error::StabilityExhausted(_) => "StabilityExhausted",
            Error::UnsupportedRing(_) | Error::InexactDivision(_) => "UnsupportedRing",
            Error::InternalConsistency(_) => "InternalConsistency",
        }
    }

    /// Malformed input, as opposed to a well-formed request the mathematics rejects.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::InvalidArgument(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
