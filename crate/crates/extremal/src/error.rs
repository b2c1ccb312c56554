use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExtremalError {
    #[error("centring needs t > 0, got {0}")]
    NonPositiveTime(f64),
    #[error("empty snapshot")]
    EmptySnapshot,
    #[error("clan lookback must be positive, got {0}")]
    BadLookback(f64),
    #[error("particle {0} is not in the snapshot")]
    NotInSnapshot(u64),
    #[error("x_norm {x_norm} is outside the admissible band [{lo}, {hi}]")]
    OutsideBand { x_norm: f64, lo: f64, hi: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] bbm_core::CoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
