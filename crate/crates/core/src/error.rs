use thiserror::Error;

/// Errors raised by game construction, surrogate modelling and the solver loop.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The game or solver configuration is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The joint candidate set would exceed the configured cap.
    #[error("joint space has {size} candidates, above the cap of {cap}")]
    SpaceTooLarge { size: u128, cap: usize },

    /// Cholesky factorization failed even at the largest allowed jitter.
    #[error("surrogate model is corrupt: kernel matrix not positive definite (jitter {jitter:e})")]
    ModelCorrupt { jitter: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A numeric argument fell outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A bound entry was consumed where it is undefined, or tables were mixed up.
    #[error("logic error: {0}")]
    Logic(String),

    #[error("missing history: {0}")]
    MissingHistory(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
