use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use bbm_core::{unit_sphere_volume, CounterRng};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{MartingaleError, Result};

pub const DEFAULT_CIRCLE_NODES: usize = 512;
pub const DEFAULT_D3_DEGREE: usize = 47;
pub const DEFAULT_RANDOM_NODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    TwoPoint,
    Trapezoid,
    GaussProduct,
    Fibonacci,
    Random,
}

/// Quadrature nodes on `S^{d−1}` with weights summing to the sphere volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionGrid {
    dim: usize,
    kind: GridKind,
    /// Flat, `dim` coordinates per node.
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Largest spherical-harmonic degree integrated exactly, when known.
    exact_degree: Option<usize>,
}

impl DirectionGrid {
    /// `δ_1 + δ_{−1}`.
    pub fn two_point() -> Self {
        DirectionGrid {
            dim: 1,
            kind: GridKind::TwoPoint,
            nodes: vec![1.0, -1.0],
            weights: vec![1.0, 1.0],
            exact_degree: Some(usize::MAX),
        }
    }

    /// `n` equally spaced angles on the circle, each with weight `2π/n`.
    pub fn circle(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(MartingaleError::BadGrid("circle needs at least 2 nodes".into()));
        }
        let mut nodes = Vec::with_capacity(2 * n);
        for k in 0..n {
            let a = 2.0 * PI * k as f64 / n as f64;
            nodes.extend([a.cos(), a.sin()]);
        }
        Ok(DirectionGrid {
            dim: 2,
            kind: GridKind::Trapezoid,
            nodes,
            weights: vec![2.0 * PI / n as f64; n],
            exact_degree: Some(n - 1),
        })
    }

    /// Gauss–Legendre in `cos θ` times the trapezoid rule in azimuth on `S²`,
    /// exact for spherical harmonics up to `degree`.
    pub fn gauss_product(degree: usize) -> Self {
        let nu = degree / 2 + 1;
        let nphi = degree + 1;
        let (us, ws) = gauss_legendre(nu);
        let mut nodes = Vec::with_capacity(3 * nu * nphi);
        let mut weights = Vec::with_capacity(nu * nphi);
        for (&u, &w) in us.iter().zip(&ws) {
            let s = (1.0 - u * u).max(0.0).sqrt();
            for j in 0..nphi {
                let phi = 2.0 * PI * (j as f64 + 0.5) / nphi as f64;
                nodes.extend([s * phi.cos(), s * phi.sin(), u]);
                weights.push(w * 2.0 * PI / nphi as f64);
            }
        }
        DirectionGrid { dim: 3, kind: GridKind::GaussProduct, nodes, weights, exact_degree: Some(degree) }
    }

    /// Fibonacci lattice on `S²` with equal weights `4π/n`.
    pub fn fibonacci(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(MartingaleError::BadGrid("fibonacci lattice needs at least 2 nodes".into()));
        }
        let golden = PI * (3.0 - 5f64.sqrt());
        let mut nodes = Vec::with_capacity(3 * n);
        for k in 0..n {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            let s = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            nodes.extend([s * phi.cos(), s * phi.sin(), z]);
        }
        Ok(DirectionGrid {
            dim: 3,
            kind: GridKind::Fibonacci,
            nodes,
            weights: vec![4.0 * PI / n as f64; n],
            exact_degree: None,
        })
    }

    /// `n` independent uniform directions with equal weights.
    pub fn random(d: usize, n: usize, seed: u64) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(MartingaleError::BadGrid("random grid needs d ≥ 1 and n ≥ 1".into()));
        }
        let mut rng = CounterRng::for_particle(seed, u64::MAX, 0);
        let mut nodes = Vec::with_capacity(d * n);
        let mut z = vec![0.0; d];
        for _ in 0..n {
            loop {
                for c in z.iter_mut() {
                    *c = StandardNormal.sample(&mut rng);
                }
                let r = bbm_core::norm(&z);
                if r > 1e-12 {
                    nodes.extend(z.iter().map(|c| c / r));
                    break;
                }
            }
        }
        Ok(DirectionGrid {
            dim: d,
            kind: GridKind::Random,
            nodes,
            weights: vec![unit_sphere_volume(d) / n as f64; n],
            exact_degree: None,
        })
    }

    /// The default grid for dimension `d` (uncached; see [`default_grid`]).
    pub fn default_for(d: usize) -> Result<Self> {
        match d {
            0 => Err(MartingaleError::BadGrid("dimension must be positive".into())),
            1 => Ok(Self::two_point()),
            2 => Self::circle(DEFAULT_CIRCLE_NODES),
            3 => Ok(Self::gauss_product(DEFAULT_D3_DEGREE)),
            _ => Self::random(d, DEFAULT_RANDOM_NODES, 0x5eed),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.nodes[k * self.dim..(k + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exact_degree(&self) -> Option<usize> {
        self.exact_degree
    }

    /// `Σ_k w_k g(θ_k)`.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, g: F) -> f64 {
        self.nodes().zip(&self.weights).map(|(t, w)| w * g(t)).sum()
    }
}

/// Shared, lazily built default grid for dimension `d`.
pub fn default_grid(d: usize) -> Result<Arc<DirectionGrid>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<DirectionGrid>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(g) = cache.read().expect("grid cache poisoned").get(&d) {
        return Ok(g.clone());
    }
    let g = Arc::new(DirectionGrid::default_for(d)?);
    let mut w = cache.write().expect("grid cache poisoned");
    Ok(w.entry(d).or_insert(g).clone())
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    fn circle_moment(a: u32, b: u32) -> f64 {
        if a % 2 == 1 || b % 2 == 1 {
            return 0.0;
        }
        let (a, b) = (a as f64, b as f64);
        2.0 * gamma((a + 1.0) / 2.0) * gamma((b + 1.0) / 2.0) / gamma((a + b + 2.0) / 2.0)
    }

    fn sphere_moment(a: u32, b: u32, c: u32) -> f64 {
        if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
            return 0.0;
        }
        let (a, b, c) = (a as f64, b as f64, c as f64);
        2.0 * gamma((a + 1.0) / 2.0) * gamma((b + 1.0) / 2.0) * gamma((c + 1.0) / 2.0)
            / gamma((a + b + c + 3.0) / 2.0)
    }

    #[test]
    fn weights_sum_to_sphere_volume() {
        for d in 1..=5 {
            let g = DirectionGrid::default_for(d).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert!((s - unit_sphere_volume(d)).abs() < 1e-10, "d = {d}: {s}");
            assert!(g.weights().iter().all(|&w| w > 0.0));
            for t in g.nodes() {
                assert!((bbm_core::norm(t) - 1.0).abs() < 1e-12);
            }
        }
        let f = DirectionGrid::fibonacci(1000).unwrap();
        assert!((f.weights().iter().sum::<f64>() - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn gauss_legendre_small_cases() {
        let (x, w) = gauss_legendre(2);
        assert!((x[0] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(3);
        assert!(x[1].abs() < 1e-15);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-14);
        assert!((x[0] - 0.6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn circle_is_exact_to_its_degree() {
        let g = DirectionGrid::circle(32).unwrap();
        for a in 0..=31u32 {
            for b in 0..=(31 - a) {
                let q = g.integrate(|t| t[0].powi(a as i32) * t[1].powi(b as i32));
                assert!((q - circle_moment(a, b)).abs() < 1e-12, "{a} {b}: {q}");
            }
        }
    }

    #[test]
    fn gauss_product_is_exact_to_its_degree() {
        let deg = 15;
        let g = DirectionGrid::gauss_product(deg);
        assert_eq!(g.exact_degree(), Some(deg));
        for a in 0..=deg as u32 {
            for b in 0..=(deg as u32 - a) {
                for c in 0..=(deg as u32 - a - b) {
                    let q = g.integrate(|t| {
                        t[0].powi(a as i32) * t[1].powi(b as i32) * t[2].powi(c as i32)
                    });
                    assert!((q - sphere_moment(a, b, c)).abs() < 1e-12, "{a} {b} {c}: {q}");
                }
            }
        }
        let big = DirectionGrid::gauss_product(DEFAULT_D3_DEGREE);
        let q = big.integrate(|t| t[2].powi(46));
        assert!((q - sphere_moment(0, 0, 46)).abs() < 1e-13);
    }

    #[test]
    fn default_grid_is_shared() {
        let a = default_grid(3).unwrap();
        let b = default_grid(3).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert!(a.len() >= 1000);
        assert!(default_grid(0).is_err());
    }

    #[test]
    fn random_grid_is_reproducible() {
        let a = DirectionGrid::random(4, 100, 3).unwrap();
        let b = DirectionGrid::random(4, 100, 3).unwrap();
        assert_eq!(a, b);
    }
}
