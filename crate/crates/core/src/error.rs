use thiserror::Error;

/// Errors raised by the analysis operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An IFS description violates its invariants.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// A construction would exceed the configured size cap.
    #[error("resource cap exceeded: {what} needs {requested}, cap is {cap}")]
    ResourceCap {
        what: &'static str,
        requested: String,
        cap: u64,
    },

    /// Text that could not be read as a number.
    #[error("cannot parse {0:?} as a number")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::InvalidSpec(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
