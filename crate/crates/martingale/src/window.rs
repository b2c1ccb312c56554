use std::f64::consts::{PI, SQRT_2};

use bbm_core::{alpha, norm, CoreError, ParticleId, Snapshot};

use crate::{MartingaleError, Result};

/// `[√2t − t^{2/3}, √2t − t^{1/6}]`.
pub fn window_bounds(t: f64) -> Result<(f64, f64)> {
    if !(t >= 1.0) {
        return Err(MartingaleError::ShortTime(t));
    }
    Ok((SQRT_2 * t - t.powf(2.0 / 3.0), SQRT_2 * t - t.powf(1.0 / 6.0)))
}

fn in_window(s: &Snapshot) -> Result<impl Iterator<Item = (ParticleId, &[f64], f64)> + '_> {
    let (lo, hi) = window_bounds(s.time)?;
    Ok(s.iter().filter_map(move |(id, x)| {
        let r = norm(x);
        (lo <= r && r <= hi).then_some((id, x, r))
    }))
}

/// Ids of the particles whose norm lies in the closed window.
pub fn window_select(s: &Snapshot) -> Result<Vec<ParticleId>> {
    Ok(in_window(s)?.map(|(id, _, _)| id).collect())
}

/// `R^{−α_d} (√2t − R) e^{−√2(√2t − R)}`.
pub fn frontier_weight(r: f64, t: f64, d: usize) -> Result<f64> {
    if !(r > 0.0) {
        return Err(MartingaleError::NonPositiveRadius(r));
    }
    let z = SQRT_2 * t - r;
    Ok(r.powf(-alpha(d)) * z * (-SQRT_2 * z).exp())
}

/// `Z_t`: the frontier weights summed over the window.
pub fn z_statistic(s: &Snapshot, d: usize) -> Result<f64> {
    if s.dim() != d {
        return Err(CoreError::DimensionMismatch { expected: d, got: s.dim() }.into());
    }
    let t = s.time;
    in_window(s)?.map(|(_, _, r)| frontier_weight(r, t, d)).sum()
}

/// `(2π)^{α_d/2} Σ_{window} f(θ_u) 𝔐_t^(u)`.
pub fn weighted_window_sum<F: Fn(&[f64]) -> f64>(s: &Snapshot, f: F) -> Result<f64> {
    let (t, d) = (s.time, s.dim());
    let mut theta = vec![0.0; d];
    let mut total = 0.0;
    for (_, x, r) in in_window(s)? {
        for (th, c) in theta.iter_mut().zip(x) {
            *th = c / r;
        }
        total += f(&theta) * frontier_weight(r, t, d)?;
    }
    Ok((2.0 * PI).powf(alpha(d) / 2.0) * total)
}

/// `Σ_{R ∉ window} R^{−α_d} (1 + |√2t − R|) e^{−√2(√2t − R)}`.
///
/// Particles at the origin have no direction and are skipped.
pub fn non_window_sum(s: &Snapshot) -> Result<f64> {
    let (lo, hi) = window_bounds(s.time)?;
    let a = alpha(s.dim());
    let st = SQRT_2 * s.time;
    Ok(s.iter()
        .map(|(_, x)| norm(x))
        .filter(|&r| r > 0.0 && !(lo <= r && r <= hi))
        .map(|r| r.powf(-a) * (1.0 + (st - r).abs()) * (-SQRT_2 * (st - r)).exp())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn snap(t: f64, pts: &[[f64; 2]]) -> Snapshot {
        let mut s = Snapshot::new(t, 2);
        for (i, x) in pts.iter().enumerate() {
            s.push(i as u64, x);
        }
        s
    }

    #[test]
    fn bounds_at_64() {
        let (lo, hi) = window_bounds(64.0).unwrap();
        assert!((lo - 74.50966799187808).abs() < 1e-12);
        assert!((hi - 88.50966799187808).abs() < 1e-12);
        assert!(window_bounds(0.5).is_err());
    }

    #[test]
    fn boundary_is_included() {
        let (lo, hi) = window_bounds(64.0).unwrap();
        let s = snap(64.0, &[[lo, 0.0], [0.0, hi], [hi + 1e-9, 0.0], [0.0, lo - 1e-9]]);
        assert_eq!(window_select(&s).unwrap(), vec![0, 1]);
        let origin = snap(64.0, &[[0.0, 0.0], [0.0, 0.0]]);
        assert!(window_select(&origin).unwrap().is_empty());
        assert_eq!(z_statistic(&origin, 2).unwrap(), 0.0);
    }

    #[test]
    fn frontier_weight_values() {
        // mpmath, 30 digits.
        let t = 64.0;
        let r = SQRT_2 * t - 64f64.powf(0.25);
        let w = frontier_weight(r, t, 2).unwrap();
        assert!((w / 0.00553240190530969 - 1.0).abs() < 1e-12, "{w}");
        let w = frontier_weight(SQRT_2 * 100.0 - 10.0, 100.0, 3).unwrap();
        assert!((w / 5.48886553410813e-8 - 1.0).abs() < 1e-12, "{w}");
        assert_eq!(frontier_weight(SQRT_2 * 5.0, 5.0, 2).unwrap(), 0.0);
        assert!(frontier_weight(0.0, 5.0, 2).is_err());
        assert!(frontier_weight(-1.0, 5.0, 2).is_err());
    }

    #[test]
    fn single_particle_and_scaling() {
        let t = 64.0;
        let r = 80.0;
        let s = snap(t, &[[0.0, r], [1.0, 1.0]]);
        let w = frontier_weight(r, t, 2).unwrap();
        assert_eq!(z_statistic(&s, 2).unwrap(), w);
        let ones = weighted_window_sum(&s, |_| 1.0).unwrap();
        assert!((ones - (2.0 * PI).powf(0.25) * w).abs() < 1e-15 * ones);
        assert_eq!(weighted_window_sum(&s, |_| 0.0).unwrap(), 0.0);
        let first = weighted_window_sum(&s, |th| th[1]).unwrap();
        assert!((first - ones).abs() < 1e-15 * ones);
    }

    #[test]
    fn non_window_sum_skips_window() {
        let t = 64.0;
        let s = snap(t, &[[0.0, 80.0]]);
        assert_eq!(non_window_sum(&s).unwrap(), 0.0);
        let s = snap(t, &[[0.0, 50.0], [0.0, 0.0]]);
        let st = SQRT_2 * t;
        let want = 50f64.powf(-0.5) * (1.0 + st - 50.0) * (-SQRT_2 * (st - 50.0)).exp();
        assert!((non_window_sum(&s).unwrap() - want).abs() < 1e-15 * want);
    }

    proptest! {
        #[test]
        fn z_is_nonnegative(t in 1.0f64..40.0, pts in proptest::collection::vec((-60.0f64..60.0, -60.0f64..60.0), 0..50)) {
            let p: Vec<[f64; 2]> = pts.into_iter().map(|(a, b)| [a, b]).collect();
            let s = if p.is_empty() { Snapshot::new(t, 2) } else { snap(t, &p) };
            prop_assert!(z_statistic(&s, 2).unwrap() >= 0.0);
        }
    }
}
