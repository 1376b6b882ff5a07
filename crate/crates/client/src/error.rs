use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("connection: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed frame from server: {0}")]
    Decode(#[from] serde_json::Error),
    #[error("no response to request {id} within {timeout_ms} ms")]
    Timeout { id: u64, timeout_ms: u64 },
    #[error("server closed the connection")]
    Closed,
    #[error("server rejected `{cmd}`: {message}")]
    Rejected { cmd: &'static str, message: String },
    #[error("feed starved: no ball reached the wheels for request {request_id}")]
    FeedStarved { request_id: u64 },
    #[error("frame of {0} bytes exceeds the protocol limit")]
    FrameTooLong(usize),
    #[error("invalid endpoint `{0}`")]
    Endpoint(String),
}

pub type Result<T> = std::result::Result<T, ClientError>;
