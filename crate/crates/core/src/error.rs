use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("invalid motor curve `{id}`: {reason}")]
    InvalidCurve { id: String, reason: String },
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("flight integration produced a non-finite state at t = {t:.4} s")]
    NonFinite { t: f64 },
    #[error("trajectory has no rebound")]
    NoRebound,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(what: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
    if value.is_finite() && value >= min && value <= max {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value,
            min,
            max,
        })
    }
}
