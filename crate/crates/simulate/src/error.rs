use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(
        "expected memory {needed} bytes exceeds the budget of {budget} bytes \
         (estimate: 2e^t genealogy records plus Σ_s e^s snapshot entries); enable pruning or raise the budget"
    )]
    MemoryBudget { needed: f64, budget: usize },
    #[error("invalid coupled-mode parameters: {0}")]
    InvalidCoupled(String),
    #[error(transparent)]
    Core(#[from] bbm_core::CoreError),
}
