use std::f64::consts::SQRT_2;
use std::io::Write;
use std::sync::Arc;

use bbm_core::{dot, CoreError, Snapshot};

use crate::{DirectionGrid, Result};

/// `D_t(θ) = Σ_u (√2t − X_u·θ) e^{√2 X_u·θ − 2t}`, summed exactly.
pub fn derivative_martingale(s: &Snapshot, theta: &[f64]) -> Result<f64> {
    if theta.len() != s.dim() {
        return Err(CoreError::DimensionMismatch { expected: s.dim(), got: theta.len() }.into());
    }
    let st = SQRT_2 * s.time;
    Ok(s.iter()
        .map(|(_, x)| {
            let p = dot(x, theta);
            (st - p) * (SQRT_2 * (p - st)).exp()
        })
        .sum())
}

/// `D_t(θ_k)` on every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleField {
    pub grid: Arc<DirectionGrid>,
    pub values: Vec<f64>,
    pub time: f64,
}

impl MartingaleField {
    pub fn compute(s: &Snapshot, grid: Arc<DirectionGrid>) -> Result<Self> {
        if grid.dim() != s.dim() {
            return Err(CoreError::DimensionMismatch { expected: s.dim(), got: grid.dim() }.into());
        }
        let st = SQRT_2 * s.time;
        let mut values = vec![0.0; grid.len()];
        for (_, x) in s.iter() {
            for (v, theta) in values.iter_mut().zip(grid.nodes()) {
                let p = dot(x, theta);
                *v += (st - p) * (SQRT_2 * (p - st)).exp();
            }
        }
        Ok(MartingaleField { grid, values, time: s.time })
    }

    /// The field with negative values replaced by 0, and how many were.
    pub fn truncated(&self) -> (MartingaleField, usize) {
        let mut n = 0;
        let values = self
            .values
            .iter()
            .map(|&v| {
                if v < 0.0 {
                    n += 1;
                    0.0
                } else {
                    v
                }
            })
            .collect();
        (MartingaleField { grid: self.grid.clone(), values, time: self.time }, n)
    }

    /// Writes `theta_0..theta_{d−1},weight,value`, one row per node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for k in 0..self.grid.dim() {
            write!(w, "theta_{k},")?;
        }
        writeln!(w, "weight,value")?;
        for ((theta, wt), v) in self.grid.nodes().zip(self.grid.weights()).zip(&self.values) {
            for c in theta {
                write!(w, "{c},")?;
            }
            writeln!(w, "{wt},{v}")?;
        }
        Ok(())
    }
}

/// `Σ_k w_k f(θ_k) D(θ_k)`.
pub fn pair_integral<F: Fn(&[f64]) -> f64>(field: &MartingaleField, f: F) -> f64 {
    field
        .grid
        .nodes()
        .zip(field.grid.weights())
        .zip(&field.values)
        .map(|((theta, w), v)| w * f(theta) * v)
        .sum()
}
