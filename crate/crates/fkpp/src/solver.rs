use std::collections::HashMap;
use std::f64::consts::SQRT_2;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::banded::Banded5;
use crate::{FkppError, Result};

pub const DEFAULT_DX: f64 = 0.02;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_LEFT: f64 = -60.0;

/// The backward-Euler start lasts at least `SMOOTHING_CELLS · dx²` in time.
const SMOOTHING_CELLS: f64 = 25.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Crank–Nicolson diffusion with a backward-Euler (Rannacher) start.
    #[default]
    CrankNicolson,
    /// Forward Euler diffusion on a three-point stencil; needs `dt ≤ dx²/2`.
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub dx: f64,
    pub dt: f64,
    pub frame_speed: f64,
    pub scheme: Scheme,
    /// Backward-Euler half steps taken before switching to Crank–Nicolson
    /// (more if `25 dx²` has not yet elapsed).
    pub rannacher_steps: usize,
    /// Largest excursion outside `[0, 1]` that is clamped rather than fatal.
    pub range_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dx: DEFAULT_DX,
            dt: DEFAULT_DT,
            frame_speed: SQRT_2,
            scheme: Scheme::CrankNicolson,
            rannacher_steps: 4,
            range_tolerance: 1e-10,
        }
    }
}

impl SolverOptions {
    pub fn with_grid(dx: f64, dt: f64) -> Self {
        SolverOptions { dx, dt, ..Default::default() }
    }
}

/// Extent `[y_min, y_max]` of the moving-frame mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub y_min: f64,
    pub y_max: f64,
}

impl Domain {
    /// `[−60, max(ℓ^{2/3} + 20, reach of the full tail integral)]`, shifted by `c`.
    pub fn for_tail(ell_max: f64, c: f64) -> Self {
        let right = (ell_max.powf(2.0 / 3.0) + 20.0).max(crate::tail_extent(ell_max) + 5.0);
        Domain { y_min: DEFAULT_LEFT, y_max: right + c.max(0.0) }
    }
}

/// `1{x < 0}`, with the midpoint value at the jump.
pub fn step_profile(x: f64) -> f64 {
    if x < 0.0 {
        1.0
    } else if x == 0.0 {
        0.5
    } else {
        0.0
    }
}

/// Solution of `∂_t u = ½∂²_x u + u − u²` on a uniform mesh of the frame
/// `y = x − frame_speed·t`. Both end values stay pinned at their initial
/// values (1 and 0 for front-like data).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkppSolution {
    pub frame_speed: f64,
    pub y_min: f64,
    pub dx: f64,
    pub u: Vec<f64>,
    pub time: f64,
    /// Number of node values clamped back into `[0, 1]`.
    pub clamped: u64,
    pub max_violation: f64,
}

impl FkppSolution {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn y(&self, i: usize) -> f64 {
        self.y_min + i as f64 * self.dx
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.u.len() - 1)
    }

    pub fn x_grid(&self) -> Vec<f64> {
        (0..self.u.len()).map(|i| self.y(i)).collect()
    }

    /// Linear interpolation in the frame, constant beyond the mesh ends.
    pub fn value_at(&self, y: f64) -> f64 {
        let s = (y - self.y_min) / self.dx;
        if s <= 0.0 {
            return self.u[0];
        }
        let i = s.floor() as usize;
        if i + 1 >= self.u.len() {
            return self.u[self.u.len() - 1];
        }
        let f = s - i as f64;
        self.u[i] * (1.0 - f) + self.u[i + 1] * f
    }

    /// `u(t, x)` at lab coordinate `x`.
    pub fn value_at_lab(&self, x: f64) -> f64 {
        self.value_at(x - self.frame_speed * self.time)
    }

    /// `x ↦ 1 − u(−x)`, which is again a decreasing front.
    pub fn reflected(&self) -> Self {
        FkppSolution {
            frame_speed: -self.frame_speed,
            y_min: -self.y_max(),
            dx: self.dx,
            u: self.u.iter().rev().map(|v| 1.0 - v).collect(),
            time: self.time,
            clamped: self.clamped,
            max_violation: self.max_violation,
        }
    }

    /// `y,x_lab,u` rows.
    pub fn write_profile_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "y,x_lab,u")?;
        for (i, v) in self.u.iter().enumerate() {
            let y = self.y(i);
            writeln!(w, "{y},{},{v}", y + self.frame_speed * self.time)?;
        }
        Ok(())
    }
}

/// Evolves `u0` (a function of the lab coordinate at time 0) to time `t`.
pub fn evolve<F: Fn(f64) -> f64>(u0: F, t: f64, domain: &Domain, opts: &SolverOptions) -> Result<FkppSolution> {
    Ok(evolve_checkpoints(u0, &[t], domain, opts)?.pop().expect("one checkpoint"))
}

/// Evolves `u0` and returns the solution at each of the increasing `times`.
pub fn evolve_checkpoints<F: Fn(f64) -> f64>(
    u0: F,
    times: &[f64],
    domain: &Domain,
    opts: &SolverOptions,
) -> Result<Vec<FkppSolution>> {
    check(times, domain, opts)?;
    let n = ((domain.y_max - domain.y_min) / opts.dx).round() as usize + 1;
    let mut sol = FkppSolution {
        frame_speed: opts.frame_speed,
        y_min: domain.y_min,
        dx: opts.dx,
        u: Vec::with_capacity(n),
        time: 0.0,
        clamped: 0,
        max_violation: 0.0,
    };
    for i in 0..n {
        let x = domain.y_min + i as f64 * opts.dx;
        let v = u0(x);
        if !(0.0..=1.0).contains(&v) {
            return Err(FkppError::BadInitial { x, value: v });
        }
        sol.u.push(v);
    }

    let mut stepper = Stepper::new(n, opts);
    let mut out = Vec::with_capacity(times.len());
    let mut k = 0usize;
    for &target in times {
        while sol.time < target - 1e-9 * opts.dt {
            let (h, theta) = match opts.scheme {
                Scheme::Explicit => (opts.dt, 0.0),
                Scheme::CrankNicolson if k < opts.rannacher_steps || sol.time < SMOOTHING_CELLS * opts.dx * opts.dx => {
                    (opts.dt / 2.0, 1.0)
                }
                Scheme::CrankNicolson => (opts.dt, 0.5),
            };
            let h = h.min(target - sol.time);
            stepper.step(&mut sol.u, h, theta, theta != 0.5);
            sol.time = if (target - sol.time - h).abs() < 1e-9 * opts.dt { target } else { sol.time + h };
            k += 1;
            clamp(&mut sol, opts.range_tolerance)?;
        }
        out.push(sol.clone());
    }
    Ok(out)
}

fn check(times: &[f64], domain: &Domain, opts: &SolverOptions) -> Result<()> {
    if !(opts.dx > 0.0 && opts.dt > 0.0) {
        return Err(FkppError::Invalid("dx and dt must be positive".into()));
    }
    if opts.scheme == Scheme::Explicit && opts.dt > opts.dx * opts.dx / 2.0 {
        return Err(FkppError::Cfl { dt: opts.dt, limit: opts.dx * opts.dx / 2.0 });
    }
    if !(domain.y_max - domain.y_min >= 6.0 * opts.dx) {
        return Err(FkppError::Invalid("domain needs at least 7 nodes".into()));
    }
    if times.is_empty() || times.windows(2).any(|w| w[1] < w[0]) || times[0] < 0.0 {
        return Err(FkppError::Invalid("checkpoint times must be nonnegative and increasing".into()));
    }
    Ok(())
}

fn clamp(sol: &mut FkppSolution, tol: f64) -> Result<()> {
    let n = sol.u.len();
    for i in 1..n - 1 {
        let v = sol.u[i];
        let viol = if v < 0.0 {
            -v
        } else if v > 1.0 {
            v - 1.0
        } else if v.is_nan() {
            f64::INFINITY
        } else {
            continue;
        };
        sol.clamped += 1;
        sol.max_violation = sol.max_violation.max(viol);
        if viol > tol || viol.is_nan() {
            return Err(FkppError::OutOfRange {
                violation: viol,
                y: sol.y(i),
                time: sol.time,
                clamped: sol.clamped,
            });
        }
        sol.u[i] = v.clamp(0.0, 1.0);
    }
    Ok(())
}

/// Strang splitting: half reaction, diffusion–advection, half reaction.
///
/// Backward-Euler and explicit steps use the three-point stencil, which keeps
/// them monotone; Crank–Nicolson steps use the fourth-order one.
struct Stepper {
    /// `L = ½∂² + v∂` stencils for each row (zero rows at the boundaries).
    wide: Vec<[f64; 5]>,
    narrow: Vec<[f64; 5]>,
    factors: HashMap<(u64, u64, bool), Banded5>,
    rhs: Vec<f64>,
}

impl Stepper {
    fn new(n: usize, opts: &SolverOptions) -> Self {
        let (dx, v) = (opts.dx, opts.frame_speed);
        let d2_4 = [-1.0, 16.0, -30.0, 16.0, -1.0].map(|c| c / (12.0 * dx * dx));
        let d1_4 = [1.0, -8.0, 0.0, 8.0, -1.0].map(|c| c / (12.0 * dx));
        let d2_2 = [0.0, 1.0, -2.0, 1.0, 0.0].map(|c| c / (dx * dx));
        let d1_2 = [0.0, -1.0, 0.0, 1.0, 0.0].map(|c| c / (2.0 * dx));
        let build = |fourth: bool| {
            let mut stencil = vec![[0.0; 5]; n];
            for (i, s) in stencil.iter_mut().enumerate() {
                if i == 0 || i == n - 1 {
                    continue;
                }
                let (d2, d1) = if fourth && i > 1 && i < n - 2 { (&d2_4, &d1_4) } else { (&d2_2, &d1_2) };
                for k in 0..5 {
                    s[k] = 0.5 * d2[k] + v * d1[k];
                }
            }
            stencil
        };
        Stepper { wide: build(true), narrow: build(false), factors: HashMap::new(), rhs: vec![0.0; n] }
    }

    fn apply(stencil: &[[f64; 5]], u: &[f64], i: usize) -> f64 {
        let s = &stencil[i];
        let mut acc = 0.0;
        for (k, c) in s.iter().enumerate() {
            if *c != 0.0 {
                acc += c * u[i + k - 2];
            }
        }
        acc
    }

    fn react(u: &mut [f64], h: f64) {
        let e = h.exp();
        for v in u.iter_mut() {
            *v = *v * e / (1.0 - *v + *v * e);
        }
    }

    fn step(&mut self, u: &mut [f64], h: f64, theta: f64, monotone: bool) {
        let n = u.len();
        let stencil = if monotone { &self.narrow } else { &self.wide };
        Self::react(u, h / 2.0);
        for i in 1..n - 1 {
            self.rhs[i] = u[i] + (1.0 - theta) * h * Self::apply(stencil, u, i);
        }
        self.rhs[0] = u[0];
        self.rhs[n - 1] = u[n - 1];
        if theta > 0.0 {
            let key = (h.to_bits(), theta.to_bits(), monotone);
            if !self.factors.contains_key(&key) {
                let rows = stencil
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let mut r = s.map(|c| -theta * h * c);
                        r[2] += 1.0;
                        if i == 0 || i == n - 1 {
                            r = [0.0, 0.0, 1.0, 0.0, 0.0];
                        }
                        r
                    })
                    .collect();
                self.factors.insert(key, Banded5::factor(rows));
            }
            self.factors[&key].solve(&mut self.rhs);
        }
        u.copy_from_slice(&self.rhs);
        Self::react(u, h / 2.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Domain {
        Domain { y_min: -20.0, y_max: 20.0 }
    }

    #[test]
    fn constant_states_are_fixed_points() {
        let opts = SolverOptions::default();
        let zero = evolve(|_| 0.0, 3.0, &small(), &opts).unwrap();
        assert!(zero.u.iter().all(|&v| v == 0.0));
        let one = evolve(|_| 1.0, 3.0, &small(), &opts).unwrap();
        assert!(one.u.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn explicit_scheme_checks_cfl() {
        let opts = SolverOptions { scheme: Scheme::Explicit, ..Default::default() };
        assert!(matches!(evolve(step_profile, 1.0, &small(), &opts), Err(FkppError::Cfl { .. })));
        let ok = SolverOptions { dt: 1e-4, ..opts };
        let e = evolve(step_profile, 0.5, &small(), &ok).unwrap();
        let c = evolve(step_profile, 0.5, &small(), &SolverOptions::with_grid(0.02, 1e-3)).unwrap();
        let diff = e.u.iter().zip(&c.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-3, "{diff}");
    }

    #[test]
    fn rejects_bad_initial_data() {
        let opts = SolverOptions::default();
        assert!(matches!(evolve(|_| 1.5, 1.0, &small(), &opts), Err(FkppError::BadInitial { .. })));
        assert!(evolve_checkpoints(step_profile, &[2.0, 1.0], &small(), &opts).is_err());
    }

    #[test]
    fn checkpoints_land_on_requested_times() {
        let opts = SolverOptions::default();
        let s = evolve_checkpoints(step_profile, &[0.0, 0.333, 1.0], &small(), &opts).unwrap();
        assert_eq!(s.iter().map(|x| x.time).collect::<Vec<_>>(), vec![0.0, 0.333, 1.0]);
        let direct = evolve(step_profile, 1.0, &small(), &opts).unwrap();
        assert!(direct.u.iter().zip(&s[2].u).all(|(a, b)| (a - b).abs() < 1e-3));
    }

    #[test]
    fn reflection_and_interpolation() {
        let s = evolve(step_profile, 2.0, &small(), &SolverOptions::default()).unwrap();
        let r = s.reflected();
        for y in [-3.3, 0.0, 1.7] {
            assert!((r.value_at(y) - (1.0 - s.value_at(-y))).abs() < 1e-12);
        }
        assert_eq!(s.value_at(-100.0), 1.0);
        assert_eq!(s.value_at(100.0), 0.0);
        assert!((s.value_at_lab(SQRT_2 * 2.0 + 0.4) - s.value_at(0.4)).abs() < 1e-15);
    }

    #[test]
    fn profile_csv_has_header_and_rows() {
        let s = evolve(step_profile, 0.1, &Domain { y_min: -1.0, y_max: 1.0 }, &SolverOptions::with_grid(0.2, 0.05)).unwrap();
        let mut buf = Vec::new();
        s.write_profile_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("y,x_lab,u\n"));
        assert_eq!(text.lines().count(), s.len() + 1);
    }
}
