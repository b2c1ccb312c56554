use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use bbm_core::{norm, ParticleId, RunConfig, Snapshot};
use bbm_extremal::{centring, rmax};
use bbm_martingale::{
    affine_pair_parts, non_window_sum, pair_integral, weighted_window_sum, window_bounds, z_statistic,
    DirectionGrid, MartingaleField,
};
use bbm_simulate::SimOutput;
use serde::{Deserialize, Serialize};

use crate::{Result, VerifyError};

/// What [`summarize`] keeps from a replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryOptions {
    /// Particles with `R_t − m_t` below this are dropped.
    pub height_floor: f64,
    /// Clan look-back `r`: leaders are the maxima of the time-`(t − r)` families.
    pub clan_lookback: f64,
    /// Non-constant test function `f(θ) = b + c·θ`.
    pub affine_b: f64,
    pub affine_c: Vec<f64>,
    /// Observation times at which the full `D_L(θ)` field is evaluated.
    pub field_times: Vec<f64>,
}

impl SummaryOptions {
    pub fn for_dim(d: usize) -> Self {
        let mut c = vec![0.0; d];
        c[0] = 0.5;
        SummaryOptions { height_floor: -2.0, clan_lookback: 1.0, affine_b: 1.0, affine_c: c, field_times: vec![6.0] }
    }

    pub fn affine(&self, theta: &[f64]) -> f64 {
        self.affine_b + self.affine_c.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Statistics of the snapshot at one observation time `L ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsSummary {
    pub l: f64,
    pub population: usize,
    /// `Z_L`.
    pub z: f64,
    /// `(2π)^{α/2} Σ_win 𝔐` and `(2π)^{α/2} Σ_win f(θ) 𝔐`.
    pub weighted_one: f64,
    pub weighted_f: f64,
    /// `⟨D_L, 1⟩` and `⟨D_L, f⟩`, exact.
    pub pair_one: f64,
    pub pair_f: f64,
    pub non_window: f64,
    /// `Σ_k w_k max(D_L(θ_k), 0)` on the default grid, for field times only.
    pub d_plus_mass: Option<f64>,
    /// Grid nodes where `D_L(θ_k) < 0`.
    pub negative_nodes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AncestorInfo {
    pub l: f64,
    pub in_window: bool,
    /// Chordal distance between the particle's direction and its time-L
    /// ancestor's; 2 when the ancestor sits at the origin.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopParticle {
    pub id: ParticleId,
    /// `R_t − m_t`.
    pub height: f64,
    pub theta: Vec<f64>,
    pub ancestors: Vec<AncestorInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub replica: u64,
    pub seed: u64,
    pub d: usize,
    pub t: f64,
    pub r_max: f64,
    pub m_t: f64,
    pub population: usize,
    pub height_floor: f64,
    pub observations: Vec<ObsSummary>,
    /// Particles at or above the floor, highest first.
    pub top: Vec<TopParticle>,
    /// Clan-leader heights at or above the floor, highest first.
    pub leaders: Vec<f64>,
    /// Files holding the `D_L` fields, relative to the run directory.
    #[serde(default)]
    pub field_files: Vec<String>,
}

impl RunSummary {
    /// `R*_t − m_t`.
    pub fn max_height(&self) -> f64 {
        self.r_max - self.m_t
    }

    pub fn obs(&self, l: f64) -> Option<&ObsSummary> {
        self.observations.iter().find(|o| (o.l - l).abs() < 1e-9)
    }

    pub fn ancestor(&self, p: &TopParticle, l: f64) -> Option<AncestorInfo> {
        p.ancestors.iter().copied().find(|a| (a.l - l).abs() < 1e-9)
    }
}

fn observe(s: &Snapshot, opts: &SummaryOptions, grid: Option<&Arc<DirectionGrid>>) -> Result<ObsSummary> {
    let d = s.dim();
    let (pair_one, pair_lin) = affine_pair_parts(s, &opts.affine_c)?;
    let (d_plus_mass, negative_nodes) = match grid {
        Some(g) => {
            let field = MartingaleField::compute(s, g.clone())?;
            let (trunc, neg) = field.truncated();
            (Some(pair_integral(&trunc, |_| 1.0)), Some(neg))
        }
        None => (None, None),
    };
    Ok(ObsSummary {
        l: s.time,
        population: s.len(),
        z: z_statistic(s, d)?,
        weighted_one: weighted_window_sum(s, |_| 1.0)?,
        weighted_f: weighted_window_sum(s, |th| opts.affine(th))?,
        pair_one,
        pair_f: opts.affine_b * pair_one + pair_lin,
        non_window: non_window_sum(s)?,
        d_plus_mass,
        negative_nodes,
    })
}

/// Reduces one simulated replica to the quantities the harness tests.
pub fn summarize(cfg: &RunConfig, replica: u64, out: &SimOutput, opts: &SummaryOptions) -> Result<RunSummary> {
    let d = cfg.d;
    if opts.affine_c.len() != d {
        return Err(VerifyError::Invalid(format!("affine_c has {} entries, d = {d}", opts.affine_c.len())));
    }
    let last = out.final_snapshot();
    let t = last.time;
    let m_t = centring(d, t)?;
    let (_, r_max) = rmax(last)?;
    let grid = bbm_martingale::default_grid(d)?;

    let mut observations = Vec::new();
    for s in out.snapshots.iter().filter(|s| s.time >= 1.0) {
        let want_field = opts.field_times.iter().any(|&f| (f - s.time).abs() < 1e-9);
        observations.push(observe(s, opts, want_field.then_some(&grid))?);
    }
    let earlier: Vec<&Snapshot> = out.snapshots.iter().filter(|s| s.time >= 1.0 && s.time < t).collect();

    let mut top = Vec::new();
    for (id, x) in last.iter() {
        let r = norm(x);
        let height = r - m_t;
        if height < opts.height_floor || r == 0.0 {
            continue;
        }
        let theta: Vec<f64> = x.iter().map(|c| c / r).collect();
        let mut ancestors = Vec::with_capacity(earlier.len());
        for s in &earlier {
            let a = out.genealogy.ancestor_at(id, s.time)?;
            let i = s.index_of(a).ok_or_else(|| {
                VerifyError::Invalid(format!("ancestor {a} of {id} missing from the snapshot at {}", s.time))
            })?;
            let xa = s.position(i);
            let ra = norm(xa);
            let (lo, hi) = window_bounds(s.time)?;
            let angle = if ra == 0.0 {
                2.0
            } else {
                theta.iter().zip(xa).map(|(u, v)| (u - v / ra).powi(2)).sum::<f64>().sqrt()
            };
            ancestors.push(AncestorInfo { l: s.time, in_window: lo <= ra && ra <= hi, angle });
        }
        top.push(TopParticle { id, height, theta, ancestors });
    }
    top.sort_by(|a, b| b.height.total_cmp(&a.height).then(a.id.cmp(&b.id)));

    let mut clans: BTreeMap<ParticleId, f64> = BTreeMap::new();
    let split = t - opts.clan_lookback;
    for p in &top {
        let key = if split <= 0.0 { 0 } else { out.genealogy.ancestor_at(p.id, split)? };
        let e = clans.entry(key).or_insert(f64::NEG_INFINITY);
        *e = e.max(p.height);
    }
    let mut leaders: Vec<f64> = clans.into_values().collect();
    leaders.sort_by(|a, b| b.total_cmp(a));

    Ok(RunSummary {
        replica,
        seed: cfg.seed,
        d,
        t,
        r_max,
        m_t,
        population: last.len(),
        height_floor: opts.height_floor,
        observations,
        top,
        leaders,
        field_files: Vec::new(),
    })
}

/// One JSON object per line.
pub fn write_summaries<W: Write>(mut w: W, summaries: &[RunSummary]) -> Result<()> {
    for s in summaries {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_summaries<R: BufRead>(r: R) -> Result<Vec<RunSummary>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// Common `(d, t)` of a non-empty set of summaries.
pub fn common_shape(summaries: &[RunSummary]) -> Result<(usize, f64)> {
    let first = summaries.first().ok_or_else(|| VerifyError::MissingInput(vec!["run summaries".into()]))?;
    if summaries.iter().any(|s| s.d != first.d || s.t != first.t) {
        return Err(VerifyError::Invalid("summaries mix dimensions or horizons".into()));
    }
    Ok((first.d, first.t))
}
