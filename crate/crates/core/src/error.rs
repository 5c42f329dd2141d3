use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("dimension mismatch: expected {expected} samples, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("invalid norm exponent {0} (must be >= 1 or infinite)")]
    InvalidExponent(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("snapshot sequences are not aligned in time")]
    MisalignedTimes,
    #[error("field has spectral content outside the Friedrichs ball (residual {0:e})")]
    SupportViolation(f64),
    #[error("blow-up at t = {time}: {reason}")]
    BlowUp { time: f64, reason: String },
    #[error("continuous dependence needs nu_3 > 0 (the L2 stability estimate degenerates at nu_3 = 0)")]
    ZeroVerticalViscosity,
    #[error("unresolvable data: {0}")]
    Unresolvable(String),
    #[error("snapshot format: {0}")]
    Format(String),
}
