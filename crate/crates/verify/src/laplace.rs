use std::f64::consts::PI;

use bbm_core::alpha;
use serde::{Deserialize, Serialize};

use crate::stats::{bootstrap_ci, mean, Interval};
use crate::{Result, RunSummary, VerifyError};

/// `φ(θ, x) = a · clamp((x − x0)/width + ½, 0, 1)`: a step of height `a` at
/// `x0` smoothed over `width`. It does not depend on `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phi {
    pub a: f64,
    pub x0: f64,
    pub width: f64,
}

impl Phi {
    pub fn eval(&self, x: f64) -> f64 {
        if self.a == 0.0 {
            return 0.0;
        }
        if self.width <= 0.0 {
            return if x > self.x0 { self.a } else { 0.0 };
        }
        self.a * ((x - self.x0) / self.width + 0.5).clamp(0.0, 1.0)
    }

    /// Lowest height where `φ > 0` can hold.
    pub fn support_min(&self) -> f64 {
        self.x0 - self.width.max(0.0) / 2.0
    }

    /// Inverse of [`Phi::key`].
    pub fn from_key(s: &str) -> Option<Phi> {
        let rest = s.strip_prefix("ramp:")?;
        let (mut a, mut x0, mut w) = (None, None, None);
        for kv in rest.split(',') {
            let (k, v) = kv.split_once('=')?;
            let v: f64 = v.trim().parse().ok()?;
            match k.trim() {
                "a" => a = Some(v),
                "x0" => x0 = Some(v),
                "w" => w = Some(v),
                _ => return None,
            }
        }
        let phi = Phi { a: a?, x0: x0?, width: w? };
        (phi.a >= 0.0 && phi.width >= 0.0).then_some(phi)
    }

    /// Registry key, e.g. `ramp:a=1,x0=0,w=0.5`.
    pub fn key(&self) -> String {
        format!("ramp:a={},x0={},w={}", self.a, self.x0, self.width)
    }
}

/// `𝔠_d = √(2/π^{1+α_d})`.
pub fn frak_c(d: usize) -> f64 {
    (2.0 / PI.powf(1.0 + alpha(d))).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceComparison {
    pub phi: Phi,
    pub c_phi: f64,
    pub l: f64,
    pub lhs: Interval,
    pub rhs: Interval,
    pub overlap: bool,
    pub replicas: usize,
    /// Fraction of grid nodes where `D_L < 0` was truncated to 0.
    pub truncated_fraction: Option<f64>,
}

/// Per-replica `exp(−Σ_u φ(θ_u, R_u − m_t))`.
pub fn laplace_lhs(s: &RunSummary, phi: &Phi) -> Result<f64> {
    if phi.a != 0.0 && phi.support_min() < s.height_floor {
        return Err(VerifyError::SupportBelowFloor { support: phi.support_min(), floor: s.height_floor });
    }
    Ok((-s.top.iter().map(|p| phi.eval(p.height)).sum::<f64>()).exp())
}

/// Per-replica `exp(−𝔠_d C(φ) Σ_k w_k max(D_L(θ_k), 0))`.
pub fn laplace_rhs(s: &RunSummary, c_phi: f64, l: f64) -> Result<f64> {
    let o = s.obs(l).ok_or(VerifyError::MissingObservation(l))?;
    let mass = o.d_plus_mass.ok_or_else(|| VerifyError::MissingInput(vec![format!("D_L field at L = {l}")]))?;
    Ok((-frak_c(s.d) * c_phi * mass).exp())
}

/// Bootstrap intervals of both sides of the Laplace-functional identity over
/// the same replicas.
pub fn laplace_compare(
    phi: &Phi,
    c_phi: f64,
    summaries: &[RunSummary],
    l: f64,
    level: f64,
    resamples: usize,
    seed: u64,
) -> Result<LaplaceComparison> {
    let lhs: Vec<f64> = summaries.iter().map(|s| laplace_lhs(s, phi)).collect::<Result<_>>()?;
    let rhs: Vec<f64> = summaries.iter().map(|s| laplace_rhs(s, c_phi, l)).collect::<Result<_>>()?;
    let lhs_ci = bootstrap_ci(&lhs, mean, level, resamples, seed)?;
    let rhs_ci = bootstrap_ci(&rhs, mean, level, resamples, seed ^ 0x9e37_79b9)?;
    let mut nodes = (0usize, 0usize);
    for s in summaries {
        if let Some(n) = s.obs(l).and_then(|o| o.negative_nodes) {
            nodes.0 += n;
            nodes.1 += bbm_martingale::default_grid(s.d)?.len();
        }
    }
    Ok(LaplaceComparison {
        phi: *phi,
        c_phi,
        l,
        overlap: lhs_ci.overlaps(&rhs_ci),
        lhs: lhs_ci,
        rhs: rhs_ci,
        replicas: summaries.len(),
        truncated_fraction: (nodes.1 > 0).then(|| nodes.0 as f64 / nodes.1 as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        // mpmath: sqrt(2/pi) = 0.79788456080286535588
        assert!((frak_c(1) - 0.79788456080286535588).abs() < 1e-15);
        assert!((frak_c(3) - (2.0 / (PI * PI)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ramp_shape() {
        let p = Phi { a: 2.0, x0: 1.0, width: 0.5 };
        assert_eq!(p.eval(0.5), 0.0);
        assert_eq!(p.eval(1.0), 1.0);
        assert_eq!(p.eval(2.0), 2.0);
        assert_eq!(p.support_min(), 0.75);
        assert_eq!(p.key(), "ramp:a=2,x0=1,w=0.5");
        assert_eq!(Phi::from_key(&p.key()), Some(p));
        assert_eq!(Phi::from_key("ramp:x0=1,w=0.5,a=2"), Some(p));
        assert!(Phi::from_key("ramp:a=1,x0=0").is_none());
        assert!(Phi::from_key("ramp:a=-1,x0=0,w=1").is_none());
        assert!(Phi::from_key("step:a=1").is_none());
        let step = Phi { a: 1.0, x0: 0.0, width: 0.0 };
        assert_eq!((step.eval(0.0), step.eval(1e-9)), (0.0, 1.0));
    }
}
