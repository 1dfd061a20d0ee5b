use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("wrong number of arguments: expected {expected}, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("linear program infeasible")]
    Infeasible,
    #[error("linear program unbounded")]
    Unbounded,
    #[error("point outside the function's domain")]
    OutsideDomain,
    #[error("empty point set")]
    EmptyInput,
    #[error("zero direction vector")]
    ZeroDirection,
    #[error("level {0} exceeds the maximum of the function")]
    LevelAboveMax(String),
    #[error("dual has empty domain: function is not dominated by any support function")]
    EmptyDual,
    #[error("fan is not complete: divisor polytope is unbounded")]
    FanNotComplete,
    #[error("metric at place {0:?} is not concave")]
    NotConcave(String),
    #[error("divisor is not semipositive: {0}")]
    NotSemipositive(String),
    #[error("divisor is not wide at its maximum")]
    NotWide,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("zero radicand")]
    ZeroRadicand,
    #[error("operation requires rational-number-field mode")]
    NotQMode,
    #[error("unrealizable valuation profile at place {0}")]
    UnrealizableProfile(String),
    #[error("0 is not in the sup-differential")]
    ZeroNotInSet,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Semantic(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
