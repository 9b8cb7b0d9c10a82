use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WedgeError {
    #[error("opening angle {0} must lie strictly inside (0, 2π)")]
    BadAngle(f64),

    #[error("point ({x1}, {x2}) lies outside the closed wedge")]
    OutsideWedge { x1: f64, x2: f64 },

    #[error("weight is singular at ({x1}, {x2}) for the requested exponents")]
    SingularWeight { x1: f64, x2: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-integrable exponents: {0}")]
    NonIntegrable(String),

    #[error("quadrature budget exceeded (best estimate {best}, error estimate {error})")]
    BudgetExceeded { best: f64, error: f64 },

    #[error("non-finite value at node ({j}, {i})")]
    NonFinite { j: usize, i: usize },

    #[error("point ({x1}, {x2}) lies outside the resolved annulus")]
    OutsideAnnulus { x1: f64, x2: f64 },

    #[error("parameters rejected: {0}")]
    Rejected(String),

    #[error("symbol modulus {modulus:e} below threshold near excluded mode n={witness}")]
    Conditioning { modulus: f64, witness: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, WedgeError>;
