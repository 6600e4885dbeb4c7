use std::path::PathBuf;

/// Errors of the std frontend. Each maps to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: cannot decode image: {message}", path.display())]
    Decode { path: PathBuf, message: String },
    #[error("{}: cannot encode image: {message}", path.display())]
    Encode { path: PathBuf, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Pipeline(#[from] dermsal_core::Error),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 usage or configuration, 2 input/output, 3 pipeline stage failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) | AppError::Config(_) => 1,
            AppError::Io { .. } | AppError::Decode { .. } | AppError::Encode { .. } | AppError::Dataset(_) => 2,
            AppError::Pipeline(e) => match e.root() {
                dermsal_core::Error::Parameter(_) if e.stage().is_none() => 1,
                _ => 3,
            },
        }
    }
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;
