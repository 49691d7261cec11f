use std::io;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Core(#[from] qpower_core::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("bad state file: {0}")]
    Format(String),
    #[error("bad model file: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for numerical breakdown, 1 for everything the user can fix by
    /// changing the command line or inputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
