use thiserror::Error;

/// Failure modes shared by every layer of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not antisymmetric (|A + A^T| = {residual:e})")]
    NonAntisymmetric { residual: f64 },
    #[error("rotation axis has zero length")]
    ZeroAxis,
    #[error("degenerate projective state: {0}")]
    DegenerateState(&'static str),
    #[error("position vector is at the origin")]
    OriginSingularity,
    #[error("angular momentum vanishes (rectilinear orbit)")]
    RectilinearOrbit,
    #[error("true anomaly lies beyond the conic asymptote")]
    AsymptoteReached,
    #[error("l^2 - k2 = {0:e} is not positive")]
    ImaginaryFrequency(f64),
    #[error("state violates |q| = 1, q.p = 0 (|q| - 1 = {q_drift:e}, lambda = {lambda:e})")]
    ConstraintViolated { q_drift: f64, lambda: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coordinate ordering or parameter tags do not match")]
    OrderingMismatch,
    #[error("step size {step:e} underflowed at {at}")]
    StepUnderflow { at: f64, step: f64 },
    #[error("maximum number of steps ({0}) exceeded")]
    MaxStepsExceeded(usize),
    #[error("non-finite state encountered at {at}")]
    NonFiniteState { at: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
