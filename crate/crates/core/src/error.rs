use core::fmt;

/// Errors raised by the samplers, simulators and statistics in this crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    Domain {
        what: &'static str,
        value: f64,
    },
    /// A quantity that must be finite overflowed (e.g. a tail probability
    /// underflowed to zero before taking its logarithm).
    Overflow { what: &'static str },
    /// A statistic is undefined for the given input (e.g. division by
    /// `log Z_n = 0`).
    Undefined { what: &'static str },
    /// Not enough samples or replicates for the requested statistic.
    InsufficientData { needed: usize, got: usize },
    /// The displacement law does not belong to the class an operation needs.
    WrongTailClass { expected: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::Overflow { what } => write!(f, "numerical overflow in {what}"),
            Error::Undefined { what } => write!(f, "statistic undefined: {what}"),
            Error::InsufficientData { needed, got } => {
                write!(f, "insufficient data: need at least {needed}, got {got}")
            }
            Error::WrongTailClass { expected } => {
                write!(f, "operation requires a {expected} displacement law")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
