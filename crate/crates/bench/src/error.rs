use std::path::PathBuf;

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] alkrig::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    ConfigSyntax { file: String, line: usize, message: String },
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("summary CSV: {0}")]
    Summary(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{failed} of {total} theory checks failed")]
    TheoryFailed { failed: usize, total: usize },
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io { path: path.into(), source }
    }

    pub fn config(field: &str, message: impl Into<String>) -> Self {
        BenchError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Numerical failures map to exit code 2, everything else to 1.
    pub fn is_numerical(&self) -> bool {
        match self {
            BenchError::Core(e) => e.is_numerical(),
            BenchError::TheoryFailed { .. } => true,
            _ => false,
        }
    }
}
