use thiserror::Error;

#[derive(Debug, Error)]
pub enum ShootError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("non-finite loss in epoch {epoch}, batch {batch} (lr {lr:.3e}, largest |weight| {max_weight:.3e})")]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        lr: f64,
        max_weight: f64,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Core(#[from] launcher_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, ShootError>;
