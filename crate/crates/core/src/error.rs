use thiserror::Error;

#[derive(Debug, Error)]
pub enum GndError {
    /// Malformed input document.
    #[error("parse error: {0}")]
    Parse(String),
    /// Instance or profile violates a structural invariant.
    #[error("invalid instance: {0}")]
    Structural(String),
    /// No feasible reply exists (disconnected terminals, unreachable target).
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    /// An exhaustive oracle would exceed its enumeration limits.
    #[error("enumeration refused: {0}")]
    EnumerationRefused(String),
    /// The requested computation is not supported for this input size or kind.
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GndError>;
