use std::f64::consts::{PI, SQRT_2};

use bbm_core::{dot, CoreError, Snapshot};

use crate::Result;

const SERIES_LIMIT: f64 = 25.0;

/// `Γ(x)` for `x` a positive multiple of 1/2.
fn gamma_half(x: f64) -> f64 {
    let (mut g, mut y) = if (x - x.floor()).abs() < 1e-12 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while y < x - 1e-12 {
        g *= y;
        y += 1.0;
    }
    g
}

/// `κ^{−ν} I_ν(κ) e^{−κ}` for `ν ∈ {−1/2, 0, 1/2, 1, …}` and `κ ≥ 0`.
///
/// Power series below `κ = 25`, Hankel asymptotic expansion above it.
pub fn scaled_bessel(nu: f64, kappa: f64) -> f64 {
    if kappa < SERIES_LIMIT {
        let q = kappa * kappa / 4.0;
        let mut term = 1.0 / gamma_half(nu + 1.0);
        let mut sum = term;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= q / (k * (k + nu));
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum * 2f64.powf(-nu) * (-kappa).exp()
    } else {
        let mu = 4.0 * nu * nu;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let j = (2 * k - 1) as f64;
            let next = -term * (mu - j * j) / (8.0 * k as f64 * kappa);
            if next == 0.0 || next.abs() > term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum / (2.0 * PI * kappa).sqrt() * kappa.powf(-nu)
    }
}

/// [`scaled_bessel`] at orders `ν, ν + 1, ν + 2` from one pass of the series.
pub fn scaled_bessel_triple(nu: f64, kappa: f64) -> [f64; 3] {
    if kappa >= SERIES_LIMIT {
        return [scaled_bessel(nu, kappa), scaled_bessel(nu + 1.0, kappa), scaled_bessel(nu + 2.0, kappa)];
    }
    let q = kappa * kappa / 4.0;
    let mut term = 1.0 / gamma_half(nu + 1.0);
    let mut sums = [term, term / (nu + 1.0), term / ((nu + 1.0) * (nu + 2.0))];
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        let t1 = term / (k + nu + 1.0);
        sums[0] += term;
        sums[1] += t1;
        sums[2] += t1 / (k + nu + 2.0);
        if term < 1e-17 * sums[0] {
            break;
        }
    }
    let e = (-kappa).exp() * 2f64.powf(-nu);
    [sums[0] * e, sums[1] * e / 2.0, sums[2] * e / 4.0]
}

/// `⟨D_t, f⟩` in closed form for the affine `f(θ) = b + c·θ`.
///
/// Each particle contributes `∫ (b + c·θ)(√2t − x·θ) e^{√2x·θ − 2t} σ(dθ)`,
/// which reduces to modified Bessel functions of order `d/2 − 1, d/2, d/2 + 1`
/// evaluated at `√2‖x‖`.
pub fn affine_pair_integral(s: &Snapshot, b: f64, c: &[f64]) -> Result<f64> {
    let (one, lin) = affine_pair_parts(s, c)?;
    Ok(b * one + lin)
}

/// `(⟨D_t, 1⟩, ⟨D_t, c·θ⟩)` from a single pass over the particles.
pub fn affine_pair_parts(s: &Snapshot, c: &[f64]) -> Result<(f64, f64)> {
    let d = s.dim();
    if c.len() != d {
        return Err(CoreError::DimensionMismatch { expected: d, got: c.len() }.into());
    }
    let t = s.time;
    let nu = d as f64 / 2.0 - 1.0;
    let pre = (2.0 * PI).powf(d as f64 / 2.0);
    let st = SQRT_2 * t;
    let (mut one, mut lin) = (0.0, 0.0);
    for (_, x) in s.iter() {
        let rho2 = dot(x, x);
        let kappa = (2.0 * rho2).sqrt();
        let [s0, s1, s2] = scaled_bessel_triple(nu, kappa);
        let e = (kappa - 2.0 * t).exp();
        one += (st * s0 - SQRT_2 * rho2 * s1) * e;
        let cx = dot(c, x);
        if cx != 0.0 {
            lin += cx * ((2.0 * t - 1.0) * s1 - 2.0 * rho2 * s2) * e;
        }
    }
    Ok((pre * one, pre * lin))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_matches_single_orders() {
        for nu in [-0.5, 0.0, 0.5, 1.0] {
            for &k in &[0.0f64, 0.01, 1.0, 7.5, 24.9, 30.0] {
                let t = scaled_bessel_triple(nu, k);
                for (j, v) in t.iter().enumerate() {
                    let want = scaled_bessel(nu + j as f64, k);
                    assert!((v - want).abs() <= 1e-14 * want.abs(), "ν = {nu}, κ = {k}, j = {j}");
                }
            }
        }
    }

    #[test]
    fn half_integer_orders_match_elementary_forms() {
        for &k in &[0.3f64, 1.0, 7.5, 24.9, 25.1, 60.0] {
            // κ^{1/2} I_{−1/2}(κ) = √(2/π) cosh κ.
            let want = (2.0 / PI).sqrt() * (1.0 + (-2.0 * k).exp()) / 2.0;
            let got = scaled_bessel(-0.5, k);
            assert!((got / want - 1.0).abs() < 1e-13, "κ = {k}");
            // κ^{−1/2} I_{1/2}(κ) = √(2/π) sinh κ / κ.
            let want = (2.0 / PI).sqrt() * (1.0 - (-2.0 * k).exp()) / (2.0 * k);
            let got = scaled_bessel(0.5, k);
            assert!((got / want - 1.0).abs() < 1e-13, "κ = {k}");
        }
    }

    #[test]
    fn integer_orders_match_high_precision_values() {
        // mpmath: besseli(n, κ)·κ^{−n}·e^{−κ}, 30 digits.
        let cases = [
            (0.0, 2.0, 0.30850832255367104),
            (1.0, 2.0, 0.10763464462446883),
            (0.0, 20.0, 0.089780311884826022),
            (2.0, 20.0, 0.00020257422416624289),
            (0.0, 30.0, 0.073145946482237294),
            (1.0, 30.0, 0.0023972110199549185),
            (3.0, 30.0, 2.3260294076421195e-6),
        ];
        for (nu, k, want) in cases {
            let got = scaled_bessel(nu, k);
            assert!((got / want - 1.0).abs() < 1e-12, "ν = {nu}, κ = {k}: {got} vs {want}");
        }
    }

    #[test]
    fn value_at_zero() {
        assert!((scaled_bessel(0.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((scaled_bessel(1.0, 0.0) - 0.5).abs() < 1e-15);
        assert!((scaled_bessel(0.5, 0.0) - (2.0 / PI).sqrt()).abs() < 1e-15);
    }
}
