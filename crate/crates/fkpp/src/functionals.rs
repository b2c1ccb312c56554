use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::{evolve_checkpoints, step_profile, Domain, FkppError, FkppSolution, Result, SolverOptions};

/// Lab-frame position where the profile first drops below `level`.
pub fn front_position(sol: &FkppSolution, level: f64) -> Result<f64> {
    for i in 0..sol.len().saturating_sub(1) {
        let (a, b) = (sol.u[i], sol.u[i + 1]);
        if a >= level && b < level {
            let y = sol.y(i) + (a - level) / (a - b) * sol.dx;
            return Ok(y + sol.frame_speed * sol.time);
        }
    }
    Err(FkppError::NotBracketed(level))
}

/// Least-squares fit of `front(t) = v t + b log t + c`, returned as `(v, b, c)`.
pub fn fit_front(times: &[f64], fronts: &[f64]) -> Result<(f64, f64, f64)> {
    if times.len() != fronts.len() || times.len() < 3 || times.iter().any(|&t| !(t > 0.0)) {
        return Err(FkppError::Invalid("need at least three positive times, one front each".into()));
    }
    let mut m = vec![[0.0; 4]; 3];
    for (&t, &x) in times.iter().zip(fronts) {
        let row = [t, t.ln(), 1.0];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            m[i][3] += row[i] * x;
        }
    }
    let [v, b, c] = solve3(m);
    Ok((v, b, c))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMode {
    /// `[0, ∞)`, cut where the integrand drops below `1e-16` of its peak.
    #[default]
    Full,
    /// `[ℓ^{1/3}, ℓ^{2/3}]`.
    Window,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailWeight {
    /// `w e^{√2 w}`.
    #[default]
    Sqrt2,
    /// `w e^{√w}`.
    SqrtW,
}

impl TailWeight {
    fn eval(self, w: f64) -> f64 {
        match self {
            TailWeight::Sqrt2 => w * (SQRT_2 * w).exp(),
            TailWeight::SqrtW => w * w.sqrt().exp(),
        }
    }
}

/// Frame coordinate the full tail integral needs the mesh to reach, beyond `c`.
pub fn tail_extent(ell: f64) -> f64 {
    (90.0 * ell).sqrt()
}

/// `∫ weight(w) u(ℓ, √2ℓ + w + c) dw` by the trapezoid rule, with `ℓ = sol.time`.
pub fn tail_integral(sol: &FkppSolution, c: f64, mode: TailMode, weight: TailWeight) -> Result<f64> {
    let ell = sol.time;
    let have = sol.y_max();
    let g = |w: f64| weight.eval(w) * sol.value_at(w + c);
    match mode {
        TailMode::Full => {
            let need = c + tail_extent(ell);
            if have < need {
                return Err(FkppError::DomainTooSmall { need, have });
            }
            let h = sol.dx;
            let (mut sum, mut peak, mut prev) = (0.0, 0.0f64, g(0.0));
            let mut k = 1usize;
            loop {
                let w = k as f64 * h;
                if w > need - c {
                    break;
                }
                let cur = g(w);
                sum += 0.5 * h * (prev + cur);
                peak = peak.max(cur.abs());
                if cur.abs() < 1e-16 * peak {
                    break;
                }
                prev = cur;
                k += 1;
            }
            Ok(sum)
        }
        TailMode::Window => {
            let (a, b) = (ell.powf(1.0 / 3.0), ell.powf(2.0 / 3.0));
            if have < b + c + sol.dx {
                return Err(FkppError::DomainTooSmall { need: b + c + sol.dx, have });
            }
            let n = ((b - a) / sol.dx).ceil().max(1.0) as usize;
            let h = (b - a) / n as f64;
            let inner: f64 = (1..n).map(|k| g(a + k as f64 * h)).sum();
            Ok(h * (inner + 0.5 * (g(a) + g(b))))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailOptions {
    pub mode: TailMode,
    pub weight: TailWeight,
    pub c: f64,
    pub ell_min: f64,
    /// Relative change between the last two doublings that counts as converged.
    pub tolerance: f64,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions { mode: TailMode::Full, weight: TailWeight::Sqrt2, c: 0.0, ell_min: 10.0, tolerance: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub ells: Vec<f64>,
    pub values: Vec<f64>,
    /// `|v_{k+1} / v_k − 1|` for successive doublings.
    pub rel_changes: Vec<f64>,
    /// Value at the largest ℓ.
    pub value: f64,
    pub converged: bool,
    pub tolerance: f64,
}

impl ConvergenceReport {
    fn from_values(ells: Vec<f64>, values: Vec<f64>, tolerance: f64) -> Self {
        let rel_changes: Vec<f64> = values.windows(2).map(|w| (w[1] / w[0] - 1.0).abs()).collect();
        let converged = rel_changes.last().is_some_and(|&r| r < tolerance);
        ConvergenceReport { value: *values.last().unwrap_or(&f64::NAN), ells, values, rel_changes, converged, tolerance }
    }

    /// `ell,value` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "ell,value")?;
        for (l, v) in self.ells.iter().zip(&self.values) {
            writeln!(w, "{l},{v}")?;
        }
        Ok(())
    }
}

/// `ℓ_max, ℓ_max/2, …` down to `ell_min`, ascending.
pub fn doubling_ells(ell_max: f64, ell_min: f64) -> Vec<f64> {
    let mut v = vec![ell_max];
    while v.last().unwrap() / 2.0 >= ell_min {
        v.push(v.last().unwrap() / 2.0);
    }
    v.reverse();
    v
}

/// Tail integrals of the solution started from `u0` at `ℓ_max/2^k`.
pub fn tail_convergence<F: Fn(f64) -> f64>(
    u0: F,
    ell_max: f64,
    solver: &SolverOptions,
    tail: &TailOptions,
) -> Result<ConvergenceReport> {
    if !(ell_max > 0.0) {
        return Err(FkppError::Invalid("ell_max must be positive".into()));
    }
    let ells = doubling_ells(ell_max, tail.ell_min.min(ell_max));
    let sols = evolve_checkpoints(u0, &ells, &Domain::for_tail(ell_max, tail.c), solver)?;
    let values = sols
        .iter()
        .map(|s| tail_integral(s, tail.c, tail.mode, tail.weight))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_values(ells, values, tail.tolerance))
}

/// `γ = C_{1{x<0}}`.
pub fn gamma_constant(ell_max: f64, dx: f64, dt: f64) -> Result<ConvergenceReport> {
    tail_convergence(step_profile, ell_max, &SolverOptions::with_grid(dx, dt), &TailOptions::default())
}

/// `C(φ)` from `u(0, x) = 1 − e^{−φ(−x)}`.
pub fn c_phi<P: Fn(f64) -> f64>(
    phi: P,
    ell_max: f64,
    dx: f64,
    dt: f64,
    weight: TailWeight,
) -> Result<ConvergenceReport> {
    let tail = TailOptions { weight, ..Default::default() };
    tail_convergence(|x| 1.0 - (-phi(-x)).exp(), ell_max, &SolverOptions::with_grid(dx, dt), &tail)
}

/// `γ* = √(2^{1+α_d}/π) γ`.
pub fn gamma_star(gamma: f64, d: usize) -> f64 {
    let a = (d as f64 - 1.0) / 2.0;
    (2f64.powf(1.0 + a) / PI).sqrt() * gamma
}

/// Limit of `v(ℓ) = v_∞ + a ℓ^{−1/2} + b ℓ^{−1}` through the last three
/// points (the last two drop the `ℓ^{−1}` term).
pub fn extrapolate_inverse_sqrt(ells: &[f64], values: &[f64]) -> Result<f64> {
    let n = ells.len().min(values.len());
    match n {
        0 | 1 => Err(FkppError::Invalid("need at least two points to extrapolate".into())),
        2 => {
            let (s0, s1) = (ells[0].powf(-0.5), ells[1].powf(-0.5));
            let a = (values[1] - values[0]) / (s1 - s0);
            Ok(values[1] - a * s1)
        }
        _ => {
            let (l, v) = (&ells[n - 3..n], &values[n - 3..n]);
            let rows: Vec<[f64; 4]> = (0..3).map(|i| [1.0, l[i].powf(-0.5), 1.0 / l[i], v[i]]).collect();
            Ok(solve3(rows)[0])
        }
    }
}

fn solve3(mut m: Vec<[f64; 4]>) -> [f64; 3] {
    for p in 0..3 {
        let piv = (p..3).max_by(|&a, &b| m[a][p].abs().total_cmp(&m[b][p].abs())).unwrap();
        m.swap(p, piv);
        for r in p + 1..3 {
            let f = m[r][p] / m[p][p];
            for c in p..4 {
                m[r][c] -= f * m[p][c];
            }
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][3] - s) / m[i][i];
    }
    x
}
