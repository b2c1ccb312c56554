use bbm_core::{norm, Genealogy, Snapshot};
use serde::{Deserialize, Serialize};

use crate::{centring, ExtremalError, Result};

/// `2 L^{−1/12}`.
pub fn angular_threshold(l: f64) -> f64 {
    2.0 * l.powf(-1.0 / 12.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularStability {
    pub fraction: f64,
    /// Particles with `R_t > m_t + y`.
    pub qualifying: usize,
    /// Qualifying particles whose time-L ancestor direction moved by at
    /// least `2 L^{−1/12}`.
    pub exceeding: usize,
    /// Set when no particle qualified; the fraction is then 0.
    pub empty: bool,
}

/// Fraction of particles above `m_t + y` whose direction differs from their
/// time-L ancestor's by at least `2 L^{−1/12}` in chordal distance.
pub fn angular_stability_fraction(
    g: &Genealogy,
    snap_l: &Snapshot,
    snap_t: &Snapshot,
    y: f64,
) -> Result<AngularStability> {
    let (l, t) = (snap_l.time, snap_t.time);
    if l > t {
        return Err(ExtremalError::Invalid(format!("L = {l} must not exceed t = {t}")));
    }
    let level = centring(snap_t.dim(), t)? + y;
    let thr = angular_threshold(l);
    let (mut qualifying, mut exceeding) = (0usize, 0usize);
    for (id, x) in snap_t.iter() {
        let r = norm(x);
        if r <= level {
            continue;
        }
        qualifying += 1;
        let a = g.ancestor_at(id, l)?;
        let xa = snap_l
            .index_of(a)
            .map(|i| snap_l.position(i))
            .ok_or(ExtremalError::NotInSnapshot(a))?;
        let ra = norm(xa);
        if ra == 0.0 {
            exceeding += 1;
            continue;
        }
        let dist2: f64 = x.iter().zip(xa).map(|(u, v)| (u / r - v / ra).powi(2)).sum();
        if dist2.sqrt() >= thr {
            exceeding += 1;
        }
    }
    Ok(AngularStability {
        fraction: if qualifying == 0 { 0.0 } else { exceeding as f64 / qualifying as f64 },
        qualifying,
        exceeding,
        empty: qualifying == 0,
    })
}

fn band(x_norm: f64, l: f64, r: f64) -> Result<(f64, f64)> {
    let (lo, hi) = (l - l.powf(2.0 / 3.0), l - l.powf(1.0 / 6.0));
    if !(lo..=hi).contains(&x_norm) {
        return Err(ExtremalError::OutsideBand { x_norm, lo, hi });
    }
    if !(r > 0.0) {
        return Err(ExtremalError::Invalid("R must be positive".into()));
    }
    // (outer radius R + L, ball radius R + L^{5/6})
    Ok((r + l, r + l.powf(5.0 / 6.0)))
}

/// `cos` of the angle between `x` and a point at norm `s` on the sphere
/// `‖z − x‖ = ρ`, written to avoid cancellation when `s, ρ ≫ a`.
fn cos_on_shell(a: f64, s: f64, rho: f64) -> f64 {
    (((s - rho) * (s + rho) + a * a) / (2.0 * a * s)).clamp(-1.0, 1.0)
}

fn chordal_from_cos(c: f64) -> f64 {
    std::f64::consts::SQRT_2 * (1.0 - c).max(0.0).sqrt()
}

/// `sup ‖x/‖x‖ − z/‖z‖‖` over `z ∈ B(x, R + L^{5/6}) \ B(0, R + L)` with
/// `‖x‖ = x_norm ∈ [L − L^{2/3}, L − L^{1/6}]`.
///
/// For fixed `‖z‖ = s` the widest angle sits on the boundary of the ball,
/// where `cos ∠(x, z) = (s² + ‖x‖² − ρ²)/(2‖x‖s)`; this increases with `s`,
/// so the supremum is attained at `s = R + L`.
pub fn angle_bound_certificate(x_norm: f64, l: f64, r: f64) -> Result<f64> {
    let (outer, rho) = band(x_norm, l, r)?;
    Ok(chordal_from_cos(cos_on_shell(x_norm, outer, rho)))
}

/// Same supremum found by golden-section search over the ball boundary,
/// parametrised by `s = ‖z‖ ∈ [R + L, ‖x‖ + ρ]`.
pub fn angle_bound_numeric(x_norm: f64, l: f64, r: f64) -> Result<f64> {
    let (outer, rho) = band(x_norm, l, r)?;
    let (mut lo, mut hi) = (outer, x_norm + rho);
    let f = |s: f64| cos_on_shell(x_norm, s, rho);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let best = f(lo).min(f(hi)).min(f(outer));
    Ok(chordal_from_cos(best))
}
