use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A class lookup or term access needs a sequence term that was never
    /// materialized because it lies beyond the configured cap.
    #[error("sequence term needed for {what} lies beyond the materialization cap {cap}")]
    SequenceCapExceeded { what: String, cap: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("vertex {0} is not reachable from the root")]
    UnreachableVertex(usize),

    #[error("ball of radius {radius} around vertex {vertex} leaves the materialized graph")]
    TruncationUnsound { vertex: usize, radius: u64 },

    #[error("graph has a closed finite strongly connected component containing vertex {0}")]
    FiniteTrapDetected(usize),

    #[error("walk reached truncated vertex {0}; materialize a larger ball")]
    WalkEscapedBall(usize),

    #[error("enumeration too large: {0}")]
    TooLarge(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
