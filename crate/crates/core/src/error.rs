//! Error type shared by every module of the crate.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by validation, evaluation and the construction drivers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Structurally invalid input (bad interval, overlapping bands, ...).
    Validation(String),
    /// Input outside the mathematical domain of an operation
    /// (pole inside a band, evaluation point on the set, ...).
    Domain(String),
    /// A computation cannot reach the requested accuracy in `f64`.
    Precision(String),
    /// A numerical subroutine failed (ill-conditioned solve, no bracket, ...).
    Numerical(String),
    /// The solver produced data violating one of its own invariants.
    Internal(String),
    /// An inductive construction step could not be completed.
    Construction(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn precision(msg: impl Into<String>) -> Self {
        Error::Precision(msg.into())
    }
    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
    pub(crate) fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Validation(m) => write!(f, "validation error: {m}"),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Precision(m) => write!(f, "precision error: {m}"),
            Error::Numerical(m) => write!(f, "numerical error: {m}"),
            Error::Internal(m) => write!(f, "internal consistency error: {m}"),
            Error::Construction(m) => write!(f, "construction error: {m}"),
        }
    }
}

impl core::error::Error for Error {}
