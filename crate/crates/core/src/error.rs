//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a structural precondition (out-of-range ids,
    /// non-total assignments, malformed preferences, ...).
    #[error("malformed input: {0}")]
    MalformedInput(String),

    /// The instance is well-formed but outside what the operation supports
    /// (e.g. a margin of victory query on a single-alternative election).
    #[error("unsupported instance: {0}")]
    UnsupportedInstance(String),

    /// A target margin that no nonempty district can meet (t = 0).
    #[error("infeasible target: {0}")]
    InfeasibleTarget(String),

    /// The instance must be handed to a different solver (e.g. restricted
    /// mobility passed to the full-mobility partitioning solver).
    #[error("wrong solver: {0}")]
    WrongSolver(String),

    /// A configured resource budget would be exceeded; reports the bound.
    #[error("resource limit exceeded: {what} = {actual} exceeds budget {budget}")]
    ResourceLimit {
        what: String,
        actual: u128,
        budget: u128,
    },

    /// A parse failure in one of the text formats, with a 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
