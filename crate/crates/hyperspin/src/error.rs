use std::path::PathBuf;

use hyperspin_core::error::Error as CoreError;

pub type Result<T> = std::result::Result<T, AppError>;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error("{path}, row {row}: {message}")]
    Row { path: PathBuf, row: usize, message: String },

    #[error("model error: {0}")]
    Model(String),

    #[error("sampling violates Nyquist: {0}")]
    NyquistViolation(String),

    #[error("fit failed: {0}")]
    Fit(#[source] CoreError),

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AppError {
    /// Process exit code: 2 for configuration and input errors, 3 for model
    /// errors, 4 for fit failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Input { .. } | AppError::Row { .. } | AppError::NyquistViolation(_) => 2,
            AppError::Model(_) => 3,
            AppError::Fit(_) => 4,
            AppError::Write { .. } => 1,
        }
    }

    pub fn input(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        AppError::Input {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidInput(m) => AppError::Config(m.to_string()),
            CoreError::EmptyObservations => AppError::Config("observation set is empty".into()),
            e @ (CoreError::Stage { .. } | CoreError::SingularNormalMatrix { .. }) => AppError::Fit(e),
            e => AppError::Model(e.to_string()),
        }
    }
}
