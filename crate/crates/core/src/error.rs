use thiserror::Error;

/// Errors produced by tree, presentation, presheaf, and matrix operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data (duplicate edge names, unknown generators, bad JSON shape).
    #[error("validation error: {0}")]
    Validation(String),

    /// An operation was called outside its domain of definition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A case the calculus deliberately leaves undefined (e.g. outer faces of
    /// single-vertex trees).
    #[error("unsupported case: {0}")]
    Unsupported(String),

    /// An enumeration request exceeded the configured safety ceiling.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A relation check found a counterexample.
    #[error("verification failed: {0}")]
    Verification(String),

    /// An invariant the library maintains internally was observed to fail.
    /// Seeing this error is a bug.
    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
