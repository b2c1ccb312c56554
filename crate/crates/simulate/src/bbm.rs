use bbm_core::{CounterRng, EndKind, Genealogy, ParticleId, ParticleRecord, RunConfig, Snapshot};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::{Result, SimError};

/// One GiB.
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30;

#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    /// Refuse unpruned runs whose [`memory_estimate`] exceeds this many bytes.
    pub memory_budget: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { memory_budget: DEFAULT_MEMORY_BUDGET }
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub genealogy: Genealogy,
    /// One snapshot per observation time, in increasing time order, with
    /// entries in increasing particle id order.
    pub snapshots: Vec<Snapshot>,
}

impl SimOutput {
    /// Snapshot at observation time `s`, if `s` was requested.
    pub fn snapshot_at(&self, s: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|x| x.time == s)
    }

    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("horizon is always observed")
    }
}

/// `E|N_t| = e^t`.
pub fn expected_population(t: f64) -> f64 {
    t.exp()
}

/// Expected bytes held by an unpruned run: `2e^t` genealogy records
/// (branch nodes plus leaves) and `e^s` snapshot entries of `8 + 8d` bytes
/// for each observation time `s`.
pub fn memory_estimate(cfg: &RunConfig) -> f64 {
    let rec = (std::mem::size_of::<ParticleRecord>() + std::mem::size_of::<[u64; 2]>()) as f64;
    let entry = (8 + 8 * cfg.d) as f64;
    let snaps: f64 = cfg.observation_times.iter().map(|&s| s.exp()).sum();
    2.0 * cfg.horizon_t.exp() * rec + snaps * entry
}

pub fn simulate_bbm(cfg: &RunConfig) -> Result<SimOutput> {
    simulate_replica(cfg, 0, &SimOptions::default())
}

/// Simulates replica `replica` of `cfg`.
///
/// Particle `id` draws from the stream keyed by `(cfg.seed, replica, id)`:
/// first its lifetime, then `d` standard normals per Gaussian leg.
pub fn simulate_replica(cfg: &RunConfig, replica: u64, opts: &SimOptions) -> Result<SimOutput> {
    cfg.validate()?;
    let prune = cfg.prune_rule();
    if !prune.is_on() {
        let needed = memory_estimate(cfg);
        if needed > opts.memory_budget as f64 {
            return Err(SimError::MemoryBudget { needed, budget: opts.memory_budget });
        }
    }
    let d = cfg.d;
    let horizon = cfg.horizon_t;
    let obs = &cfg.observation_times;
    let cap = (2.0 * horizon.exp()).min(1e8) as usize;
    let mut g = Genealogy::with_capacity(horizon, cap);
    let mut snaps: Vec<Snapshot> = obs
        .iter()
        .map(|&s| Snapshot::with_capacity(s, d, (1.5 * s.exp()).min(1e8) as usize))
        .collect();

    // Pending particles as (parent, birth) with positions stacked flat. Ids
    // are handed out when a particle is visited, so every snapshot receives
    // its entries in increasing id order.
    let mut stack: Vec<(Option<ParticleId>, f64)> = vec![(None, 0.0)];
    let mut pos_stack: Vec<f64> = cfg.start_position.coords.clone();
    let mut x = vec![0.0; d];

    while let Some((parent, birth)) = stack.pop() {
        let id = match parent {
            Some(p) => g.spawn(p)?,
            None => 0,
        };
        let base = pos_stack.len() - d;
        x.copy_from_slice(&pos_stack[base..]);
        pos_stack.truncate(base);

        let mut rng = CounterRng::for_particle(cfg.seed, replica, id);
        let death = birth + rng.exp1();
        let survives = death >= horizon;
        let mut t = birth;
        let mut k = obs.partition_point(|&s| s < birth);
        let mut pruned = false;
        while k < obs.len() && (obs[k] < death || survives) {
            let s = obs[k];
            advance(&mut x, s - t, &mut rng);
            t = s;
            if s < horizon && prune.kills(bbm_core::norm(&x), s) {
                g.close(id, s, EndKind::Pruned)?;
                pruned = true;
                break;
            }
            snaps[k].push(id, &x);
            k += 1;
        }
        if pruned {
            continue;
        }
        if survives {
            g.close(id, horizon, EndKind::AliveAtHorizon)?;
            continue;
        }
        advance(&mut x, death - t, &mut rng);
        g.close(id, death, EndKind::Branched)?;
        for _ in 0..2 {
            stack.push((Some(id), death));
            pos_stack.extend_from_slice(&x);
        }
    }
    Ok(SimOutput { genealogy: g, snapshots: snaps })
}

#[inline]
fn advance(x: &mut [f64], dt: f64, rng: &mut CounterRng) {
    if dt <= 0.0 {
        return;
    }
    let sd = dt.sqrt();
    for c in x.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *c += sd * z;
    }
}

/// Runs replicas `0..n` in parallel and maps each output through `f`.
///
/// Results are returned in replica order and do not depend on the thread count.
pub fn run_replicas<T, F>(cfg: &RunConfig, n: u64, opts: &SimOptions, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, SimOutput) -> T + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .map(|r| simulate_replica(cfg, r, opts).map(|out| f(r, out)))
        .collect()
}
