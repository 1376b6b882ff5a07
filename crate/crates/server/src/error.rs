use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("invalid server configuration: {0}")]
    Config(String),
    #[error("cannot bind {what} listener on {addr}: {source}")]
    Bind {
        what: &'static str,
        addr: String,
        source: std::io::Error,
    },
    #[error("backend `external` has no driver in this build; use `sim`")]
    UnsupportedBackend,
    #[error(transparent)]
    Core(#[from] launcher_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config file: {0}")]
    Json(#[from] serde_json::Error),
}

impl ServerError {
    pub(crate) fn bind(what: &'static str, addr: impl Into<String>, source: std::io::Error) -> Self {
        Self::Bind {
            what,
            addr: addr.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, ServerError>;

