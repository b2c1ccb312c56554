use serde::{Deserialize, Serialize};

use crate::stats::{bootstrap_ci, linear_fit, Interval, LinearFit};
use crate::{Result, VerifyError};

/// Fewest samples inside the window for a conclusive fit.
pub const MIN_TAIL_SAMPLES: usize = 50;

/// The y-range and mesh on which the log-survival curve is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailWindow {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for TailWindow {
    fn default() -> Self {
        TailWindow { lo: 0.5, hi: 3.0, step: 0.05 }
    }
}

impl TailWindow {
    fn mesh(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step).round() as usize;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GumbelFit {
    pub slope: f64,
    pub fit: Option<LinearFit>,
    pub ci: Option<Interval>,
    pub samples: usize,
    pub in_window: usize,
    /// Set when fewer than [`MIN_TAIL_SAMPLES`] samples fall in the window.
    pub inconclusive: bool,
}

impl GumbelFit {
    /// `|slope/target − 1| ≤ rel_tol`, never true for an inconclusive fit.
    pub fn within(&self, target: f64, rel_tol: f64) -> bool {
        !self.inconclusive && (self.slope / target - 1.0).abs() <= rel_tol
    }
}

/// Least-squares fit of `log S(y)` against `y` on the window mesh, where `S`
/// is the empirical survival function of `sorted` (ascending).
pub fn survival_slope(sorted: &[f64], w: &TailWindow) -> Option<LinearFit> {
    let n = sorted.len() as f64;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for y in w.mesh() {
        let above = sorted.len() - sorted.partition_point(|&h| h <= y);
        if above > 0 {
            xs.push(y);
            ys.push((above as f64 / n).ln());
        }
    }
    linear_fit(&xs, &ys).ok()
}

/// Slope of the log empirical survival of `heights` over `window`, with a
/// percentile bootstrap interval.
pub fn gumbel_tail_fit(
    heights: &[f64],
    window: &TailWindow,
    level: f64,
    resamples: usize,
    seed: u64,
) -> Result<GumbelFit> {
    const MIN_SAMPLES: usize = 2000;
    if heights.len() < MIN_SAMPLES {
        return Err(VerifyError::TooFewSamples { need: MIN_SAMPLES, have: heights.len() });
    }
    if !(window.lo < window.hi && window.step > 0.0) {
        return Err(VerifyError::Invalid("empty tail window".into()));
    }
    let in_window = heights.iter().filter(|&&h| window.lo <= h && h <= window.hi).count();
    let mut sorted = heights.to_vec();
    sorted.sort_by(f64::total_cmp);
    let fit = survival_slope(&sorted, window);
    if in_window < MIN_TAIL_SAMPLES || fit.is_none() {
        return Ok(GumbelFit {
            slope: fit.map_or(f64::NAN, |f| f.slope),
            fit,
            ci: None,
            samples: heights.len(),
            in_window,
            inconclusive: true,
        });
    }
    let stat = |xs: &[f64]| {
        let mut v = xs.to_vec();
        v.sort_by(f64::total_cmp);
        survival_slope(&v, window).map_or(f64::NAN, |f| f.slope)
    };
    let ci = bootstrap_ci(heights, stat, level, resamples, seed)?;
    Ok(GumbelFit { slope: fit.unwrap().slope, fit, ci: Some(ci), samples: heights.len(), in_window, inconclusive: false })
}
