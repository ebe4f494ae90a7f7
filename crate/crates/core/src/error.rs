use crate::C64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid level {0}: levels start at 1")]
    InvalidLevel(i64),
    #[error("polynomial degree {degree} exceeds cap {cap}; refine the pieces or lower the exponent")]
    DegreeOverflow { degree: usize, cap: usize },
    #[error("cannot modulate a function with a nonzero constant part")]
    UnsupportedModulation,
    #[error("invalid piecewise polynomial: {0}")]
    InvalidPoly(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("quadrature did not reach tolerance: estimate {estimate}, achieved bound {bound:e}")]
    QuadratureFailure { estimate: C64, bound: f64 },
    #[error("level search exceeded cap {cap} at coordinate {coordinate}")]
    HeavyTail { coordinate: usize, cap: u64 },
    #[error("window too small: slot {0} deviates from the base but lies outside the window")]
    WindowTooSmall(usize),
    #[error("stabilizing sequence '{0}' is defined twice with different level rules")]
    ConflictingStab(String),
    #[error("tail class does not match base sequence '{0}'")]
    BaseMismatch(String),
    #[error("{0}")]
    InvalidCharacter(String),
    #[error("ambient product measures differ")]
    MeasureMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
