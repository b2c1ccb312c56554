use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("need at least {need} samples, got {have}")]
    TooFewSamples { need: usize, have: usize },
    #[error("no observation at L = {0} in the run summaries")]
    MissingObservation(f64),
    #[error("φ support starts at {support}, below the stored height floor {floor}")]
    SupportBelowFloor { support: f64, floor: f64 },
    #[error("protocol at {path} differs from the registered one; pass an override to replace it")]
    ProtocolChanged { path: String },
    #[error("missing inputs: {}", .0.join(", "))]
    MissingInput(Vec<String>),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] bbm_core::CoreError),
    #[error(transparent)]
    Simulate(#[from] bbm_simulate::SimError),
    #[error(transparent)]
    Extremal(#[from] bbm_extremal::ExtremalError),
    #[error(transparent)]
    Martingale(#[from] bbm_martingale::MartingaleError),
    #[error(transparent)]
    Fkpp(#[from] bbm_fkpp::FkppError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
