use core::fmt;

/// Errors raised by the estimation core.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    Domain(&'static str),
    /// A configuration value violates its invariant.
    InvalidConfig(&'static str),
    /// Two inputs disagree in length.
    DimensionMismatch { expected: usize, found: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
        }
    }
}

impl core::error::Error for Error {}
