use thiserror::Error;

pub type Result<T> = std::result::Result<T, PicodError>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PicodError {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("index {index} out of range (valid: 1..={max})")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported field size {0} (supported: 2, 3, 5)")]
    UnsupportedField(u64),

    #[error("budget exceeded for {what}: needs {needed}, limit {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl PicodError {
    pub fn is_budget(&self) -> bool {
        matches!(self, PicodError::BudgetExceeded { .. })
    }
}
