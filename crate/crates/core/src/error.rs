//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

/// Errors reported by fitting, compression and the linear-algebra kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: dimension mismatch, non-finite entries, empty data.
    InvalidInput(String),
    /// Two consecutive knots coincide; every interval must have positive width.
    DegenerateKnots { index: usize },
    /// A rank budget outside `1..=min(m, n)` was requested for a fit.
    InvalidRank { rank: usize, max: usize },
    /// A time stamp outside the fitted knot span.
    OutOfDomain { t: f64, lo: f64, hi: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::DegenerateKnots { index } => {
                write!(f, "degenerate knots: t[{}] == t[{}]", index, index + 1)
            }
            Error::InvalidRank { rank, max } => {
                write!(f, "invalid rank budget {rank}: must be in 1..={max}")
            }
            Error::OutOfDomain { t, lo, hi } => {
                write!(f, "time {t} outside fitted domain [{lo}, {hi}]")
            }
        }
    }
}

impl core::error::Error for Error {}

/// Shorthand for `Error::InvalidInput` with a formatted message.
macro_rules! invalid_input {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidInput(alloc::format!($($arg)*))
    };
}

pub(crate) use invalid_input;
