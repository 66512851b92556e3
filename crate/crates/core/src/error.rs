use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MacError {
    /// An input lies outside the domain of a rate formula.
    #[error("{0}")]
    Domain(String),

    /// A caller-supplied setting (resolution, grid range, ...) is unusable.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate frontier: {0}")]
    DegenerateFrontier(String),

    #[error("empty frontier")]
    EmptyFrontier,

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("degenerate samples: {0}")]
    DegenerateSamples(String),
}

pub type Result<T> = std::result::Result<T, MacError>;

pub(crate) fn domain(msg: impl Into<String>) -> MacError {
    MacError::Domain(msg.into())
}
