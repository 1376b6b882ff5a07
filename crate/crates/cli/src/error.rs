use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Flags that parse but make no sense together.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] launcher_core::Error),
    #[error(transparent)]
    Shoot(#[from] launcher_shoot::ShootError),
    #[error(transparent)]
    Server(#[from] launcher_server::ServerError),
    #[error(transparent)]
    Client(#[from] launcher_client::ClientError),
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("cannot render config: {0}")]
    Render(String),
}

impl CliError {
    pub fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::File {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 for usage errors, 3 for everything that failed at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
