use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("position {position} out of range for a word of length {len}")]
    PositionOutOfRange { position: usize, len: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid bitstring literal {literal:?}: {reason}")]
    Parse { literal: String, reason: String },

    #[error("construction error: {0}")]
    Construction(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("code rejected: {0}")]
    InvalidCode(String),

    #[error("state outside recovery span for outcome {outcome} (residual norm^2 {residual:.3e})")]
    OutsideRecoverySpan { outcome: String, residual: f64 },

    #[error("decode failure: EMPTY outcome probability {probability:.3e}")]
    DecodeFailure { probability: f64 },

    #[error("round trip failed at deletion position {position}, trial {trial}: {source}")]
    Roundtrip {
        position: usize,
        trial: usize,
        #[source]
        source: Box<Error>,
    },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
