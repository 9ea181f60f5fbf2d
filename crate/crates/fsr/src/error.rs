use thiserror::Error;

/// Errors produced by the fsr library.
#[derive(Debug, Error)]
pub enum FsrError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Unsupported or corrupt file contents.
    #[error("format error: {0}")]
    Format(String),

    /// Operands whose shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A parameter outside its documented domain.
    #[error("invalid argument: {0}")]
    Invalid(String),

    /// Numerical failure: divergence, singular system, non-convergence.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, FsrError>;

impl FsrError {
    pub fn format(msg: impl Into<String>) -> Self {
        FsrError::Format(msg.into())
    }
    pub fn dimension(msg: impl Into<String>) -> Self {
        FsrError::Dimension(msg.into())
    }
    pub fn invalid(msg: impl Into<String>) -> Self {
        FsrError::Invalid(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        FsrError::Numerical(msg.into())
    }
}
