use eitmem_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit status: 1 for invalid input, 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config(_) | HarnessError::Output(_) => 1,
            HarnessError::Core(e) => match e {
                CoreError::InvalidGeometry(_)
                | CoreError::InvalidParameter(_)
                | CoreError::DivideByZero(_)
                | CoreError::InvalidGrid(_)
                | CoreError::InvalidSchedule(_)
                | CoreError::DegenerateMode(_)
                | CoreError::GridMismatch
                | CoreError::OutOfRange { .. }
                | CoreError::Undefined(_) => 1,
                _ => 2,
            },
        }
    }
}
