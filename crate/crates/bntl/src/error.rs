//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sequence")]
    EmptySequence,

    #[error("malformed labeling at position {position}: id {found} appears before {expected}")]
    MalformedLabeling {
        position: usize,
        found: u64,
        expected: u64,
    },

    #[error("infeasible arrival times: {reason}")]
    Infeasible { reason: String },

    #[error("parameter {name} = {value} out of range ({expected})")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("zero-mass state: {reason}")]
    ZeroMass { reason: &'static str },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unidentifiable: {0}")]
    Unidentifiable(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid argument: {0}")]
    BadArgument(String),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("length mismatch: {what} has {got}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("bad cache file: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Groups errors into the coarse classes used for process exit codes.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::EmptySequence
            | Error::MalformedLabeling { .. }
            | Error::Infeasible { .. }
            | Error::InsufficientData(_)
            | Error::Unidentifiable(_)
            | Error::LengthMismatch { .. }
            | Error::Parse { .. }
            | Error::DegenerateSplit(_)
            | Error::CacheFormat(_) => ErrorClass::Data,
            Error::ParamOutOfRange { .. } | Error::InvalidPrior(_) | Error::BadArgument(_) => {
                ErrorClass::Usage
            }
            Error::Domain(_)
            | Error::ZeroMass { .. }
            | Error::InvariantViolation(_)
            | Error::Numeric(_) => ErrorClass::Numeric,
            Error::Io(_) => ErrorClass::Io,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numeric,
    Io,
}
