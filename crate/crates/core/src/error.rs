use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Cholesky failed even after the ridge escalation allowed by the policy.
    #[error("singular matrix (dimension {dim}, last ridge {ridge:e})")]
    SingularMatrix { dim: usize, ridge: f64 },
    #[error("training failed: {0}")]
    TrainingFailure(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
