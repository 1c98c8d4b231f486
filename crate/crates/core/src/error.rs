use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A point's dimension does not match the function's.
    DimensionMismatch { expected: usize, found: usize },
    /// An exhaustive computation was asked for a dimension beyond its limit.
    DimensionTooLarge { n: usize, max: usize },
    /// `step_down` on the all-zeros point.
    NoDownwardStep,
    /// Weight-only evaluation requested for a function that is not symmetric.
    NotSymmetric,
    WeightOutOfRange { weight: u64, n: u64 },
    /// The function is not monotone; carries a violating edge `(lower, upper)`
    /// as integer-encoded points when one is known.
    NotMonotone { witness: Option<(u64, u64)> },
    InvalidSpec(String),
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    /// The estimator was invoked in a regime its parameters do not support.
    RegimeMismatch,
    /// A lower-bound family cannot be built for the requested parameters.
    Infeasible(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: function has n={expected}, point has n={found}")
            }
            Error::DimensionTooLarge { n, max } => {
                write!(f, "n={n} too large for exhaustive computation (max {max})")
            }
            Error::NoDownwardStep => f.write_str("no downward step: point has weight zero"),
            Error::NotSymmetric => f.write_str("function is not symmetric (weight-only evaluation unavailable)"),
            Error::WeightOutOfRange { weight, n } => write!(f, "weight {weight} out of range for n={n}"),
            Error::NotMonotone { witness: Some((lo, hi)) } => {
                write!(f, "function is not monotone: f({lo:#x}) > f({hi:#x})")
            }
            Error::NotMonotone { witness: None } => f.write_str("function is not monotone"),
            Error::InvalidSpec(msg) => write!(f, "invalid function spec: {msg}"),
            Error::InvalidParameter { name, value, reason } => {
                write!(f, "invalid parameter {name}={value}: {reason}")
            }
            Error::RegimeMismatch => f.write_str("estimator regime does not match parameters"),
            Error::Infeasible(msg) => write!(f, "infeasible instance: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
