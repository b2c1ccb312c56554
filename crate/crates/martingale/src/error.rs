use thiserror::Error;

#[derive(Debug, Error)]
pub enum MartingaleError {
    #[error("frontier weight needs R > 0, got {0}")]
    NonPositiveRadius(f64),
    #[error("window statistics need t >= 1, got {0}")]
    ShortTime(f64),
    #[error(
        "x = {x} is outside [{lo}, {hi}], where the Laplace-method asymptotic holds \
         (εL ≤ x ≤ √2L − K log L)"
    )]
    OutsideBand { x: f64, lo: f64, hi: f64 },
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Core(#[from] bbm_core::CoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
