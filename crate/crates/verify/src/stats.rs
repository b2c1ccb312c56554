use bbm_core::CounterRng;
use rand_core::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Result, VerifyError};

pub const DEFAULT_RESAMPLES: usize = 2000;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard error of the mean.
pub fn standard_error(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
}

/// Linear-interpolation quantile of an unsorted sample.
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    sorted_quantile(&v, p)
}

pub fn sorted_quantile(v: &[f64], p: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let h = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let i = h.floor() as usize;
    let f = h - i as f64;
    if i + 1 < v.len() {
        v[i] + f * (v[i + 1] - v[i])
    } else {
        v[i]
    }
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

pub fn iqr(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    sorted_quantile(&v, 0.75) - sorted_quantile(&v, 0.25)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_se: f64,
    pub n: usize,
}

/// Ordinary least squares `y = intercept + slope·x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(VerifyError::Invalid(format!("linear fit needs ≥ 3 paired points, got {n}")));
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(VerifyError::Invalid("linear fit with constant x".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let slope_se = (sse / (n as f64 - 2.0) / sxx).sqrt();
    Ok(LinearFit { slope, intercept, r_squared, slope_se, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    /// All samples were equal; the interval is the single point.
    pub degenerate: bool,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn overlaps(&self, o: &Interval) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Uniform index in `0..n` from one 64-bit draw.
fn index(rng: &mut CounterRng, n: usize) -> usize {
    ((rng.next_u64() as u128 * n as u128) >> 64) as usize
}

/// Percentile bootstrap interval for `statistic`.
///
/// Resample `b` draws from the stream keyed by `(seed, 0, b)`, so the result
/// does not depend on the thread count.
pub fn bootstrap_ci<S>(samples: &[f64], statistic: S, level: f64, resamples: usize, seed: u64) -> Result<Interval>
where
    S: Fn(&[f64]) -> f64 + Sync,
{
    if samples.len() < 100 {
        return Err(VerifyError::TooFewSamples { need: 100, have: samples.len() });
    }
    if !(level > 0.0 && level < 1.0) || resamples < 10 {
        return Err(VerifyError::Invalid(format!("bad bootstrap level {level} or resample count {resamples}")));
    }
    let estimate = statistic(samples);
    if samples.iter().all(|&x| x == samples[0]) {
        return Ok(Interval { estimate, lo: estimate, hi: estimate, level, degenerate: true });
    }
    let n = samples.len();
    let mut stats: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, b| {
                let mut rng = CounterRng::for_particle(seed, 0, b);
                for v in buf.iter_mut() {
                    *v = samples[index(&mut rng, n)];
                }
                statistic(buf)
            },
        )
        .collect();
    stats.sort_by(f64::total_cmp);
    let a = (1.0 - level) / 2.0;
    Ok(Interval {
        estimate,
        lo: sorted_quantile(&stats, a),
        hi: sorted_quantile(&stats, 1.0 - a),
        level,
        degenerate: false,
    })
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: usize, n: usize, level: f64) -> Interval {
    let p = if n == 0 { 0.0 } else { k as f64 / n as f64 };
    if n == 0 {
        return Interval { estimate: 0.0, lo: 0.0, hi: 1.0, level, degenerate: true };
    }
    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    let nf = n as f64;
    let denom = 1.0 + z * z / nf;
    let centre = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    Interval { estimate: p, lo: (centre - half).max(0.0), hi: (centre + half).min(1.0), level, degenerate: false }
}
