use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// A state or input outside the declared sets.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed model data (violated system or relation invariants).
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// The caller asked for something the given objects cannot do.
    #[error("usage error: {0}")]
    Usage(String),
    /// An operation needs an enumerable system but got a generator-backed one.
    #[error("capability error: {0}")]
    Capability(String),
    /// A side condition of the synthesis failed.
    #[error("condition {condition} failed: {counterexample}")]
    Condition {
        condition: &'static str,
        counterexample: String,
    },
    /// The observer ran out of candidates for a measured output.
    #[error("inconsistent measurement: {0}")]
    Inconsistent(String),
    /// Some observer candidate has no covering abstract state.
    #[error("coverage error: {0}")]
    Coverage(String),
    /// A synthesis invariant that should be unreachable was violated.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = core::result::Result<T, Error>;
