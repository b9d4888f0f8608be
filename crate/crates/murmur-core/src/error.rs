//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A precomputed table or sieve is too small for the requested input.
    /// `required` and `available` are in the units of the offending table
    /// (table limit, sieve limit, ...).
    #[error("capacity error: {what} requires limit {required} but only {available} is available")]
    Capacity {
        what: &'static str,
        required: u64,
        available: u64,
    },

    /// A cache or context was used before being initialized.
    #[error("state error: {0}")]
    State(String),

    /// Exact 64/128-bit arithmetic overflowed; results are never wrapped.
    #[error("overflow in exact arithmetic: {0}")]
    Overflow(String),

    /// A data file could not be parsed. `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn overflow(msg: impl Into<String>) -> Self {
        Error::Overflow(msg.into())
    }
}
