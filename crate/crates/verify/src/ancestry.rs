use bbm_extremal::angular_threshold;
use serde::{Deserialize, Serialize};

use crate::stats::{iqr, median, wilson_interval, Interval};
use crate::{Result, RunSummary, VerifyError};

fn check_floor(summaries: &[RunSummary], y: f64) -> Result<()> {
    match summaries.iter().map(|s| s.height_floor).reduce(f64::max) {
        Some(f) if y < f => Err(VerifyError::SupportBelowFloor { support: y, floor: f }),
        Some(_) => Ok(()),
        None => Err(VerifyError::MissingInput(vec!["run summaries".into()])),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowNecessity {
    pub l: f64,
    pub fraction: f64,
    pub ci: Interval,
    pub replicas: usize,
    /// No replica had a particle above `m_t + y`.
    pub none_qualify: bool,
}

/// For each `L`, the fraction of replicas holding a particle with
/// `R_t > m_t + y` whose time-L ancestor lies outside the window.
pub fn window_necessity_check(summaries: &[RunSummary], y: f64, ls: &[f64], level: f64) -> Result<Vec<WindowNecessity>> {
    check_floor(summaries, y)?;
    let none_qualify = !summaries.iter().any(|s| s.top.iter().any(|p| p.height > y));
    ls.iter()
        .map(|&l| {
            let mut hits = 0;
            for s in summaries {
                let mut hit = false;
                for p in s.top.iter().take_while(|p| p.height > y) {
                    let a = s.ancestor(p, l).ok_or(VerifyError::MissingObservation(l))?;
                    hit |= !a.in_window;
                }
                hits += hit as usize;
            }
            let ci = wilson_interval(hits, summaries.len(), level);
            Ok(WindowNecessity { l, fraction: ci.estimate, ci, replicas: summaries.len(), none_qualify })
        })
        .collect()
}

/// Fractions strictly decrease along the list.
pub fn is_decreasing(v: &[WindowNecessity]) -> bool {
    v.windows(2).all(|w| w[1].fraction < w[0].fraction)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularExceedance {
    pub l: f64,
    pub threshold: f64,
    pub qualifying: usize,
    pub exceeding: usize,
    pub fraction: f64,
    pub ci: Interval,
}

/// Pooled over replicas: particles above `m_t + y` whose direction moved by
/// at least `2 L^{−1/12}` since their time-L ancestor.
pub fn angular_exceedance(summaries: &[RunSummary], y: f64, l: f64, level: f64) -> Result<AngularExceedance> {
    check_floor(summaries, y)?;
    let threshold = angular_threshold(l);
    let (mut q, mut e) = (0usize, 0usize);
    for s in summaries {
        for p in s.top.iter().take_while(|p| p.height > y) {
            let a = s.ancestor(p, l).ok_or(VerifyError::MissingObservation(l))?;
            q += 1;
            e += (a.angle >= threshold) as usize;
        }
    }
    let ci = wilson_interval(e, q, level);
    Ok(AngularExceedance { l, threshold, qualifying: q, exceeding: e, fraction: ci.estimate, ci })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingStats {
    pub l: f64,
    pub median_one: f64,
    pub iqr_one: f64,
    pub median_f: f64,
    pub iqr_f: f64,
    pub used: usize,
    /// Replicas skipped because `⟨D_L, ·⟩ ≤ 0`.
    pub skipped: usize,
}

/// Ratios `(2π)^{α/2} Σ_win f 𝔐 / ⟨D_L, f⟩` for `f ≡ 1` and the affine `f`.
pub fn pairing_ratios(summaries: &[RunSummary], l: f64) -> Result<PairingStats> {
    let (mut one, mut f, mut skipped) = (Vec::new(), Vec::new(), 0);
    for s in summaries {
        let o = s.obs(l).ok_or(VerifyError::MissingObservation(l))?;
        if o.pair_one > 0.0 && o.pair_f > 0.0 {
            one.push(o.weighted_one / o.pair_one);
            f.push(o.weighted_f / o.pair_f);
        } else {
            skipped += 1;
        }
    }
    if one.is_empty() {
        return Err(VerifyError::TooFewSamples { need: 1, have: 0 });
    }
    Ok(PairingStats {
        l,
        median_one: median(&one),
        iqr_one: iqr(&one),
        median_f: median(&f),
        iqr_f: iqr(&f),
        used: one.len(),
        skipped,
    })
}
