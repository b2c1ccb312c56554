use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::stats::median;
use crate::{Result, VerifyError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LalleyBin {
    pub z_lo: f64,
    pub z_hi: f64,
    pub z_mean: f64,
    pub n: usize,
    pub median_height: f64,
    /// `exp(−γ* Z̄ e^{−√2y})` at each probe.
    pub predicted: Vec<f64>,
    /// Empirical `P(R* ≤ m_t + y)` at each probe.
    pub empirical: Vec<f64>,
    pub max_discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LalleySellke {
    pub gamma_star: f64,
    pub probes: Vec<f64>,
    pub bins: Vec<LalleyBin>,
    pub max_discrepancy: f64,
    /// Bin medians of `R* − m_t` are non-decreasing in `Z̄`.
    pub medians_monotone: bool,
}

/// Bins `(Z_L, R*_t − m_t)` pairs by `Z_L` quantile and compares each bin's
/// conditional CDF with `exp(−γ* Z̄ e^{−√2y})`.
///
/// Bins are cut at the `k/n_bins` quantiles; bins left empty by ties are
/// merged into their upper neighbour (the last into its lower one).
pub fn lalley_sellke_check(pairs: &[(f64, f64)], gamma_star: f64, n_bins: usize, probes: &[f64]) -> Result<LalleySellke> {
    if n_bins == 0 || probes.is_empty() {
        return Err(VerifyError::Invalid("need at least one bin and one probe".into()));
    }
    if pairs.len() < n_bins {
        return Err(VerifyError::TooFewSamples { need: n_bins, have: pairs.len() });
    }
    let mut v = pairs.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let zs: Vec<f64> = v.iter().map(|p| p.0).collect();
    let edges: Vec<f64> = (1..n_bins).map(|k| crate::stats::sorted_quantile(&zs, k as f64 / n_bins as f64)).collect();

    let mut groups: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n_bins];
    for p in &v {
        let k = edges.partition_point(|&e| e <= p.0).min(n_bins - 1);
        groups[k].push(*p);
    }
    let mut merged: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut carry = Vec::new();
    for g in groups {
        carry.extend(g);
        if !carry.is_empty() {
            merged.push(std::mem::take(&mut carry));
        }
    }

    let bins: Vec<LalleyBin> = merged
        .into_iter()
        .map(|g| {
            let n = g.len();
            let z_mean = g.iter().map(|p| p.0).sum::<f64>() / n as f64;
            let heights: Vec<f64> = g.iter().map(|p| p.1).collect();
            let predicted: Vec<f64> =
                probes.iter().map(|&y| (-gamma_star * z_mean * (-SQRT_2 * y).exp()).exp()).collect();
            let empirical: Vec<f64> =
                probes.iter().map(|&y| heights.iter().filter(|&&h| h <= y).count() as f64 / n as f64).collect();
            let max_discrepancy = predicted.iter().zip(&empirical).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            LalleyBin {
                z_lo: g[0].0,
                z_hi: g[n - 1].0,
                z_mean,
                n,
                median_height: median(&heights),
                predicted,
                empirical,
                max_discrepancy,
            }
        })
        .collect();
    let max_discrepancy = bins.iter().map(|b| b.max_discrepancy).fold(0.0, f64::max);
    let medians_monotone = bins.windows(2).all(|w| w[1].median_height >= w[0].median_height);
    Ok(LalleySellke { gamma_star, probes: probes.to_vec(), bins, max_discrepancy, medians_monotone })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_z_bin_has_unit_cdf() {
        let pairs: Vec<(f64, f64)> = (0..40).map(|i| (0.0, -5.0 - i as f64 * 0.01)).collect();
        let r = lalley_sellke_check(&pairs, 1.0, 4, &[-1.0, 0.0, 1.0, 2.0]).unwrap();
        assert_eq!(r.bins.len(), 1);
        assert!(r.bins[0].predicted.iter().all(|&p| p == 1.0));
        assert!(r.bins[0].empirical.iter().all(|&p| p == 1.0));
        assert_eq!(r.max_discrepancy, 0.0);
    }

    #[test]
    fn ties_merge_empty_bins() {
        let mut pairs: Vec<(f64, f64)> = (0..30).map(|_| (1.0, 0.0)).collect();
        pairs.extend((0..10).map(|i| (2.0 + i as f64, 1.0)));
        let r = lalley_sellke_check(&pairs, 1.0, 4, &[0.0]).unwrap();
        assert_eq!(r.bins.iter().map(|b| b.n).sum::<usize>(), 40);
        assert!(r.bins.iter().all(|b| b.n > 0));
        assert!(r.medians_monotone);
    }
}
