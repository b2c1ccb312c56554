use thiserror::Error;

#[derive(Debug, Error)]
pub enum FkppError {
    #[error("explicit step dt = {dt} exceeds dx²/2 = {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("u left [0, 1] by {violation:e} at y = {y}, t = {time} ({clamped} clamps so far)")]
    OutOfRange { violation: f64, y: f64, time: f64, clamped: u64 },
    #[error("initial profile must lie in [0, 1], got {value} at x = {x}")]
    BadInitial { x: f64, value: f64 },
    #[error("level {0} is not bracketed by the profile")]
    NotBracketed(f64),
    #[error("domain ends at y = {have}; the tail integral needs it to reach y = {need}")]
    DomainTooSmall { need: f64, have: f64 },
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
