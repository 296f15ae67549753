use thiserror::Error;

/// Errors produced by the analytical and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A scenario or network configuration failed validation.
    #[error("configuration error: {0}")]
    Config(String),

    /// Topology generation could not produce a connected graph.
    #[error("topology error: {0}")]
    Topology(String),

    /// Regression input was degenerate (too few points, zero variance).
    #[error("regression error: {0}")]
    Regression(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
