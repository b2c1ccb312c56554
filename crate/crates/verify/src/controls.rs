//! Synthetic datasets with known answers, including negative controls that
//! every statistical test must reject.

use std::f64::consts::SQRT_2;

use bbm_core::CounterRng;

use crate::laplace::{frak_c, Phi};
use crate::{AncestorInfo, ObsSummary, RunSummary, TopParticle};

/// Gumbel(0, 1/√2): survival `1 − exp(−e^{−√2y})`.
pub fn gumbel_sample(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = CounterRng::for_particle(seed, 1, 0);
    (0..n).map(|_| -(-rng.open01().ln()).ln() / SQRT_2).collect()
}

/// Exponential(1), whose log-survival slope is −1.
pub fn exponential_sample(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = CounterRng::for_particle(seed, 2, 0);
    (0..n).map(|_| rng.exp1()).collect()
}

/// `(Z, y)` with `Z ~ Exp(1)` and, when `coupled`, `y` drawn from
/// `P(y ≤ s | Z) = exp(−γ* Z e^{−√2s})`; otherwise `y` uses `Z = 1` for
/// every pair.
pub fn lalley_pairs(n: usize, gamma_star: f64, coupled: bool, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = CounterRng::for_particle(seed, 3, 0);
    (0..n)
        .map(|_| {
            let z = rng.exp1();
            let zz = if coupled { z } else { 1.0 };
            let y = ((gamma_star * zz).ln() - (-rng.open01().ln()).ln()) / SQRT_2;
            (z, y)
        })
        .collect()
}

/// Summaries that contradict every summary-based test: all top particles
/// descend from outside the window along a reversed direction, window sums
/// are three times the pairings, `D_L` has no positive mass and every
/// replica has the same maximum.
pub fn control_summaries(n: usize, d: usize, ls: &[f64], t: f64) -> Vec<RunSummary> {
    let mut theta = vec![0.0; d];
    theta[0] = 1.0;
    (0..n as u64)
        .map(|replica| {
            let top: Vec<TopParticle> = (0..5)
                .map(|k| TopParticle {
                    id: k,
                    height: 1.0,
                    theta: theta.clone(),
                    ancestors: ls.iter().map(|&l| AncestorInfo { l, in_window: false, angle: 2.0 }).collect(),
                })
                .collect();
            let observations = ls
                .iter()
                .chain(std::iter::once(&t))
                .map(|&l| {
                    let z = 1.0 + (replica % 7) as f64;
                    ObsSummary {
                        l,
                        population: 1,
                        z,
                        weighted_one: 3.0 * z,
                        weighted_f: 3.0 * z,
                        pair_one: z,
                        pair_f: z,
                        non_window: 0.0,
                        d_plus_mass: Some(0.0),
                        negative_nodes: Some(0),
                    }
                })
                .collect();
            RunSummary {
                replica,
                seed: 0,
                d,
                t,
                r_max: 10.0,
                m_t: 9.0,
                population: 5,
                height_floor: -2.0,
                observations,
                top,
                leaders: vec![1.0; 5],
                field_files: Vec::new(),
            }
        })
        .collect()
}

/// Summaries consistent with every summary-based test under a protocol whose
/// only Laplace test function is `phi` with `C(φ) = c_phi`.
///
/// `Z_L ~ Exp(1)` at every observation time, the maximum follows the
/// Lalley–Sellke law with `gamma_star`, the maximum is the only particle and
/// its own clan leader, `D_L^+` is chosen so the two Laplace sides agree per
/// replica, window sums scatter around the pairings by `0.3/L` and
/// out-of-window ancestry halves with each observation time.
pub fn consistent_summaries(n: usize, d: usize, ls: &[f64], t: f64, gamma_star: f64, phi: &Phi, c_phi: f64) -> Vec<RunSummary> {
    let mut rng = CounterRng::for_particle(0xc0de, 4, 0);
    let floor = -2.0;
    (0..n as u64)
        .map(|replica| {
            let z = rng.exp1();
            let y = ((gamma_star * z).ln() - (-rng.open01().ln()).ln()) / SQRT_2;
            let mut theta: Vec<f64> = (0..d)
                .map(|_| (-2.0 * rng.open01().ln()).sqrt() * (std::f64::consts::TAU * rng.open01()).cos())
                .collect();
            let r = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
            theta.iter_mut().for_each(|v| *v /= r);
            let top: Vec<TopParticle> = if y >= floor {
                let ancestors = ls
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| AncestorInfo { l, in_window: replica % (2 << i) != 0, angle: 0.01 })
                    .collect();
                vec![TopParticle { id: 0, height: y, theta: theta.clone(), ancestors }]
            } else {
                Vec::new()
            };
            let mass = top.iter().map(|p| phi.eval(p.height)).sum::<f64>() / (frak_c(d) * c_phi);
            let observations = ls
                .iter()
                .chain(std::iter::once(&t))
                .map(|&l| {
                    let e1 = 1.0 + 0.3 / l * (2.0 * rng.open01() - 1.0);
                    let ef = 1.0 + 0.3 / l * (2.0 * rng.open01() - 1.0);
                    ObsSummary {
                        l,
                        population: 1,
                        z,
                        weighted_one: e1 * z,
                        weighted_f: ef * z,
                        pair_one: z,
                        pair_f: z,
                        non_window: 0.0,
                        d_plus_mass: Some(mass),
                        negative_nodes: Some(0),
                    }
                })
                .collect();
            let m_t = 10.0;
            RunSummary {
                replica,
                seed: 0,
                d,
                t,
                r_max: m_t + y,
                m_t,
                population: 1,
                height_floor: floor,
                observations,
                leaders: top.iter().map(|p| p.height).collect(),
                top,
                field_files: Vec::new(),
            }
        })
        .collect()
}
