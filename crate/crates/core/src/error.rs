use thiserror::Error;

/// Errors raised by the simulator, optimizer and analytics routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid cavity geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("division by zero: {0}")]
    DivideByZero(&'static str),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid control schedule: {0}")]
    InvalidSchedule(String),

    #[error("degenerate temporal mode: {0}")]
    DegenerateMode(String),

    #[error("temporal modes are defined on different time grids")]
    GridMismatch,

    #[error("integration step too coarse: dt * max_rate = {ratio:.3e} exceeds {limit}")]
    Instability { ratio: f64, limit: f64 },

    #[error("input mode carries no energy (norm^2 = {0:.3e})")]
    EmptyInput(f64),

    #[error("retrieved field carries no energy (norm^2 = {0:.3e})")]
    EmptyOutput(f64),

    #[error("nonphysical variance {variance:.6} below the vacuum level")]
    NonPhysical { variance: f64 },

    #[error("nonphysical Gaussian state: var_x * var_y = {product:.6} < 1/4")]
    NonPhysicalState { product: f64 },

    #[error("efficiency formula is degenerate when kappa = 0 and gamma0 = 0")]
    DegenerateFormula,

    #[error("Fock truncation {truncation} too small: tail mass {tail:.3e}")]
    TruncationTooSmall { truncation: usize, tail: f64 },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("efficiency maximum not bracketed: best value at range end (rate {rate:.6e})")]
    NoBracket { rate: f64 },

    #[error("value {value:.6} out of range: {reason}")]
    OutOfRange { value: f64, reason: &'static str },

    #[error("undefined: {0}")]
    Undefined(&'static str),

    #[error("no root: target {target:.6} exceeds attainable maximum {attainable:.6}")]
    NoRoot { target: f64, attainable: f64 },

    #[error("time-reversal iteration did not converge in {iterations} iterations")]
    Stagnation { iterations: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
