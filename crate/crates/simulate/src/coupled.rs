use bbm_core::{alpha, CounterRng, EndKind, Genealogy, ParticleId};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Result, SimError};

#[derive(Debug, Clone, Copy)]
pub struct CoupledOptions {
    pub d: usize,
    pub seed: u64,
    pub replica: u64,
    /// Maximum Euler step; `None` means `ell / 10^4`.
    pub delta: Option<f64>,
}

impl CoupledOptions {
    pub fn new(d: usize, seed: u64) -> Self {
        Self { d, seed, replica: 0, delta: None }
    }
}

/// Samples of `R` and `W` along one particle's lifetime, starting at its
/// birth and ending at its branch time or at `ell`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledPath {
    pub particle_id: ParticleId,
    pub times: Vec<f64>,
    pub r_values: Vec<f64>,
    pub w_values: Vec<f64>,
    /// Set when the Euler iterate for `R` reached `≤ 0`; it is then reflected.
    pub hit_zero: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSummary {
    pub x0: f64,
    pub ell: f64,
    pub min_r: f64,
    pub max_abs_diff: f64,
    pub particles: usize,
    pub steps: u64,
    pub hit_zero: bool,
}

impl CouplingSummary {
    /// `G_x = {R ≥ x/4 for every particle and time}`.
    pub fn in_good_event(&self) -> bool {
        self.min_r >= self.x0 / 4.0
    }
}

/// `(2 + e^ℓ) e^{−x²/8ℓ}`.
pub fn coupling_bound(x0: f64, ell: f64) -> f64 {
    (2.0 + ell.exp()) * (-(x0 * x0) / (8.0 * ell)).exp()
}

fn check(x0: f64, ell: f64, opts: &CoupledOptions) -> Result<f64> {
    if !(x0 > 0.0) {
        return Err(SimError::InvalidCoupled("x0 must be positive".into()));
    }
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(SimError::InvalidCoupled("ell must be positive".into()));
    }
    if opts.d < 1 {
        return Err(SimError::InvalidCoupled("d must be >= 1".into()));
    }
    let delta = opts.delta.unwrap_or(ell / 1e4);
    if !(delta > 0.0) || delta > ell / 100.0 {
        return Err(SimError::InvalidCoupled(format!("delta {delta} must lie in (0, ell/100]")));
    }
    Ok(delta)
}

trait EdgeVisitor {
    /// Called at every grid point of an edge, including its start.
    fn step(&mut self, id: ParticleId, t: f64, r: f64, w: f64);
    fn end(&mut self, id: ParticleId, hit_zero: bool);
}

fn drive<V: EdgeVisitor>(x0: f64, ell: f64, opts: &CoupledOptions, v: &mut V) -> Result<Genealogy> {
    let delta = check(x0, ell, opts)?;
    let a = alpha(opts.d);
    let mut g = Genealogy::new(ell);
    let mut stack: Vec<(Option<ParticleId>, f64, f64, f64)> = vec![(None, 0.0, x0, x0)];
    while let Some((parent, birth, mut r, mut w)) = stack.pop() {
        let id = match parent {
            Some(p) => g.spawn(p)?,
            None => 0,
        };
        let mut rng = CounterRng::for_particle(opts.seed, opts.replica, id);
        let death = birth + rng.exp1();
        let end = death.min(ell);
        let n = ((end - birth) / delta).ceil().max(1.0) as u64;
        let h = (end - birth) / n as f64;
        let sh = h.sqrt();
        let mut hit = false;
        v.step(id, birth, r, w);
        for k in 1..=n {
            let z: f64 = StandardNormal.sample(&mut rng);
            let dw = sh * z;
            r += a / r * h + dw;
            w += dw;
            if r <= 0.0 {
                hit = true;
                r = r.abs().max(f64::MIN_POSITIVE);
            }
            v.step(id, birth + k as f64 * h, r, w);
        }
        v.end(id, hit);
        if death >= ell {
            g.close(id, ell, EndKind::AliveAtHorizon)?;
        } else {
            g.close(id, death, EndKind::Branched)?;
            stack.push((Some(id), death, r, w));
            stack.push((Some(id), death, r, w));
        }
    }
    Ok(g)
}

/// One coupled run with every path stored.
///
/// `R` integrates `dR = (α_d/R) dt + dW` and `W` accumulates the same
/// increments `dW`; both start at `x0` and share one branching tree.
pub fn simulate_coupled(x0: f64, ell: f64, opts: &CoupledOptions) -> Result<(Genealogy, Vec<CoupledPath>)> {
    struct Store {
        paths: Vec<CoupledPath>,
        cur: Option<CoupledPath>,
    }
    impl EdgeVisitor for Store {
        fn step(&mut self, id: ParticleId, t: f64, r: f64, w: f64) {
            let p = self.cur.get_or_insert_with(|| CoupledPath {
                particle_id: id,
                times: Vec::new(),
                r_values: Vec::new(),
                w_values: Vec::new(),
                hit_zero: false,
            });
            p.times.push(t);
            p.r_values.push(r);
            p.w_values.push(w);
        }
        fn end(&mut self, _: ParticleId, hit_zero: bool) {
            let mut p = self.cur.take().expect("every edge visits its start");
            p.hit_zero = hit_zero;
            self.paths.push(p);
        }
    }
    let mut store = Store { paths: Vec::new(), cur: None };
    let g = drive(x0, ell, opts, &mut store)?;
    let mut paths = store.paths;
    paths.sort_by_key(|p| p.particle_id);
    Ok((g, paths))
}

impl EdgeVisitor for CouplingSummary {
    fn step(&mut self, _: ParticleId, _: f64, r: f64, w: f64) {
        self.min_r = self.min_r.min(r);
        self.max_abs_diff = self.max_abs_diff.max((r - w).abs());
        self.steps += 1;
    }
    fn end(&mut self, _: ParticleId, hit_zero: bool) {
        self.particles += 1;
        self.hit_zero |= hit_zero;
    }
}

/// One coupled run reduced on the fly to its extremes, without storing paths.
pub fn simulate_coupled_summary(x0: f64, ell: f64, opts: &CoupledOptions) -> Result<CouplingSummary> {
    let mut s = CouplingSummary {
        x0,
        ell,
        min_r: f64::INFINITY,
        max_abs_diff: 0.0,
        particles: 0,
        steps: 0,
        hit_zero: false,
    };
    drive(x0, ell, opts, &mut s)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimension_paths_coincide() {
        let opts = CoupledOptions { delta: Some(0.01), ..CoupledOptions::new(1, 5) };
        let (g, paths) = simulate_coupled(3.0, 1.5, &opts).unwrap();
        g.validate().unwrap();
        assert_eq!(paths.len(), g.len());
        for p in &paths {
            assert_eq!(p.r_values, p.w_values);
        }
    }

    #[test]
    fn bessel_dominates_brownian_when_positive() {
        let opts = CoupledOptions { delta: Some(0.005), ..CoupledOptions::new(3, 2) };
        let (_, paths) = simulate_coupled(20.0, 1.0, &opts).unwrap();
        for p in &paths {
            assert!(!p.hit_zero);
            for (r, w) in p.r_values.iter().zip(&p.w_values) {
                assert!(r >= w);
            }
        }
    }

    #[test]
    fn paths_are_continuous_across_branching() {
        let opts = CoupledOptions { delta: Some(0.01), ..CoupledOptions::new(2, 8) };
        let (g, paths) = simulate_coupled(10.0, 2.0, &opts).unwrap();
        for p in &paths {
            let rec = g.get(p.particle_id).unwrap();
            assert_eq!(p.times[0], rec.birth_time);
            assert!((p.times.last().unwrap() - rec.end_time).abs() < 1e-12);
            if let Some(parent) = rec.parent_id {
                let pp = &paths[parent as usize];
                assert_eq!(pp.r_values.last(), p.r_values.first());
                assert_eq!(pp.w_values.last(), p.w_values.first());
            }
            for w in p.times.windows(2) {
                assert!(w[1] - w[0] <= 0.01 + 1e-12);
            }
        }
    }

    #[test]
    fn summary_matches_paths() {
        let opts = CoupledOptions { delta: Some(0.01), ..CoupledOptions::new(3, 9) };
        let (_, paths) = simulate_coupled(8.0, 2.0, &opts).unwrap();
        let s = simulate_coupled_summary(8.0, 2.0, &opts).unwrap();
        let min_r = paths.iter().flat_map(|p| p.r_values.iter().copied()).fold(f64::INFINITY, f64::min);
        let gap = paths
            .iter()
            .flat_map(|p| p.r_values.iter().zip(&p.w_values).map(|(r, w)| (r - w).abs()))
            .fold(0.0, f64::max);
        assert_eq!(s.min_r, min_r);
        assert_eq!(s.max_abs_diff, gap);
        assert_eq!(s.particles, paths.len());
    }

    #[test]
    fn parameter_validation() {
        let o = CoupledOptions::new(2, 0);
        assert!(simulate_coupled_summary(0.0, 1.0, &o).is_err());
        assert!(simulate_coupled_summary(1.0, 0.0, &o).is_err());
        let coarse = CoupledOptions { delta: Some(0.1), ..o };
        assert!(simulate_coupled_summary(1.0, 1.0, &coarse).is_err());
    }

    #[test]
    fn bound_formula() {
        let b = coupling_bound(4.0, 1.0);
        assert!((b - (2.0 + std::f64::consts::E) * (-2.0f64).exp()).abs() < 1e-15);
        assert!(coupling_bound(40.0, 4.0) < 1e-19);
    }
}
