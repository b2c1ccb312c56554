use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

/// Tolerance on `‖θ‖ − 1` accepted by [`sphere_distance`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// A point of ℝ^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub coords: Vec<f64>,
}

impl Position {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(CoreError::InvalidConfig("position must have d >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::NonFinite);
        }
        Ok(Self { coords })
    }

    pub fn origin(d: usize) -> Self {
        Self { coords: vec![0.0; d] }
    }

    /// `r · θ`.
    pub fn along(theta: &[f64], r: f64) -> Self {
        Self { coords: theta.iter().map(|t| t * r).collect() }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }
}

/// Direction on S^{d-1} and distance to the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub theta: Vec<f64>,
    pub r: f64,
}

impl PolarPoint {
    pub fn to_position(&self) -> Position {
        Position::along(&self.theta, self.r)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    // hypot-style scaling keeps the norm exact for huge or tiny coordinates.
    let scale = x.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = x.iter().map(|c| (c / scale) * (c / scale)).sum();
    scale * s.sqrt()
}

/// `α_d = (d − 1)/2`.
pub fn alpha(d: usize) -> f64 {
    (d as f64 - 1.0) / 2.0
}

/// Total Haar mass of S^{d-1}: 2 for d = 1, 2π for d = 2, 4π for d = 3, …
pub fn unit_sphere_volume(d: usize) -> f64 {
    assert!(d >= 1, "sphere dimension must be >= 1");
    // vol(S^{d-1}) = 2π^{d/2} / Γ(d/2), evaluated by the recursion
    // vol(S^{d+1}) = 2π/d · vol(S^{d-1}) to avoid a gamma function.
    let mut v = if d % 2 == 1 { 2.0 } else { 2.0 * std::f64::consts::PI };
    let mut k = if d % 2 == 1 { 1 } else { 2 };
    while k < d {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

/// Splits `x` into its norm and direction.
///
/// For d = 1 the direction is ±1 (S^0 = {+1, −1}).
pub fn polar_decompose(x: &Position) -> Result<PolarPoint> {
    if x.coords.iter().any(|c| !c.is_finite()) {
        return Err(CoreError::NonFinite);
    }
    let r = x.norm();
    if r == 0.0 {
        return Err(CoreError::Origin);
    }
    let theta = x.coords.iter().map(|c| c / r).collect();
    Ok(PolarPoint { theta, r })
}

/// Chordal distance `‖a − b‖` between two unit vectors.
pub fn sphere_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(CoreError::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    for v in [a, b] {
        let n = norm(v);
        if (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(CoreError::NotUnit { norm: n });
        }
    }
    Ok(chordal(a, b))
}

/// Unchecked chordal distance.
pub(crate) fn chordal(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
