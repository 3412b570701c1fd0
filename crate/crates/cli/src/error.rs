use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ciu_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0} row(s) flagged unstable (--strict)")]
    Unstable(usize),
}

impl CliError {
    /// 1 configuration, 2 model or protocol, 3 instability under `--strict`.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_model_failure() => 2,
            CliError::Unstable(_) => 3,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}
