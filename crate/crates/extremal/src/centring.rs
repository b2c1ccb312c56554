use std::f64::consts::SQRT_2;

use crate::{ExtremalError, Result};

/// `m_t^(d) = √2·t + (d − 4)/(2√2)·ln t`.
pub fn centring(d: usize, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(ExtremalError::NonPositiveTime(t));
    }
    Ok(SQRT_2 * t + (d as f64 - 4.0) / (2.0 * SQRT_2) * t.ln())
}
