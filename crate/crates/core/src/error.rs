use thiserror::Error;

use crate::genealogy::ParticleId;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("origin has no direction")]
    Origin,
    #[error("non-finite coordinate in position")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },
    #[error("unknown particle id {0}")]
    UnknownParticle(ParticleId),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid genealogy: {0}")]
    InvalidGenealogy(String),
    #[error("invalid snapshot: {0}")]
    InvalidSnapshot(String),
    #[error("record format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
