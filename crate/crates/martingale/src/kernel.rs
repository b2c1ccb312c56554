use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use bbm_core::{alpha, dot};
use serde::{Deserialize, Serialize};

use crate::{DirectionGrid, MartingaleError, Result};

/// Constant in front of the Laplace-method asymptotic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prefactor {
    /// `(2π²)^{α_d/2}`, what Laplace's method gives for `∫ e^{√2x ψ·θ} σ(dθ)`.
    #[default]
    LaplaceMethod,
    /// `(2π)^{α_d/2}`, i.e. `(2π)^{(d−1)/4}`.
    TwoPiPower,
}

pub fn laplace_prefactor(d: usize, p: Prefactor) -> f64 {
    let a = alpha(d);
    match p {
        Prefactor::LaplaceMethod => (2.0 * PI * PI).powf(a / 2.0),
        Prefactor::TwoPiPower => (2.0 * PI).powf(a / 2.0),
    }
}

/// The range `εL ≤ x ≤ √2L − K log L` on which the asymptotic is claimed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBand {
    pub eps: f64,
    pub k: f64,
}

impl Default for KernelBand {
    fn default() -> Self {
        KernelBand { eps: 0.1, k: 10.0 }
    }
}

impl KernelBand {
    pub fn bounds(&self, l: f64) -> (f64, f64) {
        (self.eps * l, SQRT_2 * l - self.k * l.ln())
    }
}

/// Quadrature of `∫ f(θ)(√2L − xψ·θ) e^{√2(xψ·θ − √2L)} σ(dθ)` on `grid`.
pub fn kernel_integral<F: Fn(&[f64]) -> f64>(
    psi: &[f64],
    x: f64,
    l: f64,
    f: F,
    grid: &DirectionGrid,
) -> f64 {
    let sl = SQRT_2 * l;
    grid.nodes()
        .zip(grid.weights())
        .map(|(theta, w)| {
            let p = x * dot(psi, theta);
            w * f(theta) * (sl - p) * (SQRT_2 * (p - sl)).exp()
        })
        .sum()
}

/// `c f(ψ) x^{−α_d} (√2L − x) e^{√2(x − √2L)}` with `c` from `prefactor`.
pub fn kernel_asymptotic<F: Fn(&[f64]) -> f64>(
    psi: &[f64],
    x: f64,
    l: f64,
    f: F,
    d: usize,
    band: &KernelBand,
    prefactor: Prefactor,
) -> Result<f64> {
    let (lo, hi) = band.bounds(l);
    if !(lo <= x && x <= hi) {
        return Err(MartingaleError::OutsideBand { x, lo, hi });
    }
    let sl = SQRT_2 * l;
    Ok(laplace_prefactor(d, prefactor)
        * f(psi)
        * x.powf(-alpha(d))
        * (sl - x)
        * (SQRT_2 * (x - sl)).exp())
}

/// `(x, quadrature/asymptotic)` on `n_x + 1` equally spaced points of the
/// band, keeping for each `x` the ratio farthest from 1 over `psis`.
pub fn kernel_ratio_table<F: Fn(&[f64]) -> f64 + Copy>(
    l: f64,
    grid: &DirectionGrid,
    psis: &[Vec<f64>],
    band: &KernelBand,
    n_x: usize,
    f: F,
    prefactor: Prefactor,
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = band.bounds(l);
    if !(lo < hi) || n_x == 0 || psis.is_empty() {
        return Err(MartingaleError::OutsideBand { x: lo, lo, hi });
    }
    let mut rows = Vec::with_capacity(n_x + 1);
    for i in 0..=n_x {
        let x = (lo + (hi - lo) * i as f64 / n_x as f64).clamp(lo, hi);
        let mut worst = 1.0;
        for psi in psis {
            let q = kernel_integral(psi, x, l, f, grid);
            let a = kernel_asymptotic(psi, x, l, f, grid.dim(), band, prefactor)?;
            let r = q / a;
            if (r - 1.0).abs() > (worst - 1.0f64).abs() {
                worst = r;
            }
        }
        rows.push((x, worst));
    }
    Ok(rows)
}

pub fn max_ratio_deviation(rows: &[(f64, f64)]) -> f64 {
    rows.iter().map(|r| (r.1 - 1.0).abs()).fold(0.0, f64::max)
}

/// Two columns, `x,ratio`.
pub fn write_ratio_table<W: Write>(mut w: W, rows: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "x,ratio")?;
    for (x, r) in rows {
        writeln!(w, "{x},{r}")?;
    }
    Ok(())
}

/// `max |kernel_integral| / ((log L) L^{−α_d} e^{√2(x − √2L)})` with `f ≡ 1`
/// over `x ∈ [√2L − K log L, √2L + K log L]`.
pub fn bad_band_constant(l: f64, grid: &DirectionGrid, k: f64, n_x: usize) -> f64 {
    let d = grid.dim();
    let mut psi = vec![0.0; d];
    psi[0] = 1.0;
    let (sl, ll) = (SQRT_2 * l, l.ln());
    let scale = ll * l.powf(-alpha(d));
    (0..=n_x)
        .map(|i| {
            let x = sl - k * ll + 2.0 * k * ll * i as f64 / n_x.max(1) as f64;
            let q = kernel_integral(&psi, x, l, |_| 1.0, grid);
            q.abs() / (scale * (SQRT_2 * (x - sl)).exp())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bbm_core::unit_sphere_volume;
    use std::sync::Arc;

    fn fine(d: usize) -> Arc<DirectionGrid> {
        match d {
            2 => Arc::new(DirectionGrid::circle(2048).unwrap()),
            _ => Arc::new(DirectionGrid::gauss_product(600)),
        }
    }

    #[test]
    fn zero_shift_is_constant_integrand() {
        for d in 1..=3 {
            let g = crate::default_grid(d).unwrap();
            let mut psi = vec![0.0; d];
            psi[0] = 1.0;
            let l = 3.0;
            let q = kernel_integral(&psi, 0.0, l, |_| 1.0, &g);
            let want = SQRT_2 * l * (-2.0 * l).exp() * unit_sphere_volume(d);
            assert!((q - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn asymptotic_example_values() {
        // mpmath, 30 digits: (2π)^{1/4} x^{−1/2}(√2L − x)e^{√2(x − √2L)} at
        // d = 2, L = 100, x = 120, and the same with (2π²)^{1/4}.
        let band = KernelBand { eps: 0.1, k: 4.0 };
        let psi = [1.0, 0.0];
        let a = kernel_asymptotic(&psi, 120.0, 100.0, |_| 1.0, 2, &band, Prefactor::TwoPiPower).unwrap();
        assert!((a / 2.158353080887369e-13 - 1.0).abs() < 1e-10, "{a}");
        let b = kernel_asymptotic(&psi, 120.0, 100.0, |_| 1.0, 2, &band, Prefactor::LaplaceMethod).unwrap();
        assert!((b / 2.873491784152877e-13 - 1.0).abs() < 1e-10, "{b}");
        let two = kernel_asymptotic(&psi, 120.0, 100.0, |_| 2.0, 2, &band, Prefactor::LaplaceMethod).unwrap();
        assert_eq!(two, 2.0 * b);
        // x = 120 lies above √2L − 10 log L, outside the default band.
        assert!(matches!(
            kernel_asymptotic(&psi, 120.0, 100.0, |_| 1.0, 2, &KernelBand::default(), Prefactor::LaplaceMethod),
            Err(MartingaleError::OutsideBand { .. })
        ));
        assert!(kernel_asymptotic(&psi, 5.0, 100.0, |_| 1.0, 2, &band, Prefactor::LaplaceMethod).is_err());
    }

    #[test]
    fn quadrature_example_matches_asymptotic() {
        // Bessel oracle: 2π e^{−2L}(√2L I_0(√2x) − x I_1(√2x)) = 2.923146915957092e-13.
        let g = fine(2);
        let psi = [1.0, 0.0];
        let q = kernel_integral(&psi, 120.0, 100.0, |_| 1.0, &g);
        assert!((q / 2.923146915957092e-13 - 1.0).abs() < 1e-10, "{q}");
        let band = KernelBand { eps: 0.1, k: 4.0 };
        let a = kernel_asymptotic(&psi, 120.0, 100.0, |_| 1.0, 2, &band, Prefactor::LaplaceMethod).unwrap();
        assert!((q / a - 1.0).abs() < 0.03);
    }

    #[test]
    fn vanishes_at_the_front() {
        let l = 100.0;
        let band = KernelBand { eps: 0.1, k: 0.0 };
        let a = kernel_asymptotic(&[1.0, 0.0], SQRT_2 * l, l, |_| 1.0, 2, &band, Prefactor::default()).unwrap();
        assert_eq!(a, 0.0);
    }

    #[test]
    fn rotation_invariance() {
        for d in [2, 3] {
            let g = fine(d);
            let unit = |v: &[f64]| -> Vec<f64> {
                let n = bbm_core::norm(&v[..d]);
                v[..d].iter().map(|c| c / n).collect()
            };
            let psi_a = unit(&[0.3, 0.9, 0.2]);
            let psi_b = unit(&[-0.7, 0.1, 0.5]);
            let a = kernel_integral(&psi_a, 30.0, 30.0, |_| 1.0, &g);
            let b = kernel_integral(&psi_b, 30.0, 30.0, |_| 1.0, &g);
            assert!((a / b - 1.0).abs() < 1e-10, "d = {d}: {a} {b}");
        }
    }

    #[test]
    fn ratio_table_csv() {
        let rows = vec![(1.0, 1.01), (2.0, 0.98)];
        assert!((max_ratio_deviation(&rows) - 0.02).abs() < 1e-12);
        let mut buf = Vec::new();
        write_ratio_table(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,ratio\n1,1.01\n2,0.98\n");
    }
}
