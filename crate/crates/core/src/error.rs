use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("coupling a = {a} violates the Hardy bound a > {bound}")]
    HardyViolation { a: f64, bound: f64 },
    #[error("field and plan live on different grids")]
    GridMismatch,
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("exponent window violated: {0}")]
    ExponentWindow(String),
    #[error("invalid multiplier: {0}")]
    InvalidSpec(String),
    #[error("zero field")]
    ZeroField,
    #[error("evolution requires an admissible coupling (a > -1/4 + 1/25 in d = 3); pass the override to proceed")]
    Inadmissible,
}

pub type Result<T> = std::result::Result<T, Error>;
