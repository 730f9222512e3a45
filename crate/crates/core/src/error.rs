use thiserror::Error;

/// Errors raised by graph construction, builders and oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A caller broke an operation's documented contract.
    #[error("contract violation: {0}")]
    Contract(String),
    /// Malformed textual or JSON input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// An internal invariant failed; indicates a bug.
    #[error("invariant violated: {0}")]
    Invariant(String),
    /// A schedule log does not describe a valid store-and-forward run.
    #[error("malformed schedule: {0}")]
    Schedule(String),
    /// The input graph admits no connected dominating set.
    #[error("graph is disconnected")]
    Disconnected,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
