use thiserror::Error;

/// Errors produced by the solver, baselines, and data pipeline.
#[derive(Error, Debug)]
pub enum SpcaError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The model is undefined on the given data (e.g. every pairwise
    /// fidelity is zero because all samples coincide).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, SpcaError>;

impl SpcaError {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        SpcaError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        SpcaError::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
