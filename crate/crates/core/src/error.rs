use thiserror::Error;

/// Errors surfaced by the bound computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation: {0}")]
    Validation(String),

    /// A quadrature or series evaluation missed its requested tolerance.
    #[error("numeric: {msg} (achieved tolerance {achieved:e})")]
    Numeric { msg: String, achieved: f64 },

    /// The bound is meaningless for the given inputs (e.g. all-useless channels).
    #[error("degenerate bound: {0}")]
    Degenerate(String),

    /// Exhaustive oracle refused an instance that is too large to enumerate.
    #[error("instance too large: {0}")]
    TooLarge(String),

    /// Pre-bisection sampling found the objective non-monotone.
    #[error("non-monotone samples: {0}")]
    NonMonotone(String),

    /// A bisection bracket could not be established.
    #[error("bracket: {0}")]
    Bracket(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}
