use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurError {
    #[error("singular value decomposition did not converge for a {rows}x{cols} matrix")]
    SvdNonConvergence { rows: usize, cols: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A theorem-level precondition does not hold, so the requested
    /// quantity carries no guarantee.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CurError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        CurError::Domain(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        CurError::Shape(msg.into())
    }

    pub(crate) fn hypothesis(msg: impl Into<String>) -> Self {
        CurError::Hypothesis(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, CurError>;
