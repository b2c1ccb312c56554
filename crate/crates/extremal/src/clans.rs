use std::collections::BTreeMap;

use bbm_core::{norm, polar_decompose, sphere_distance, Genealogy, ParticleId, Position, Snapshot};
use serde::{Deserialize, Serialize};

use crate::{ExtremalError, Result};

/// The particles alive at time `t` that descend from one particle alive at `t − r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clan {
    pub leader_id: ParticleId,
    pub leader_norm: f64,
    /// Sorted ascending.
    pub member_ids: Vec<ParticleId>,
    pub ancestor_id: ParticleId,
    pub r: f64,
}

/// Offsets `(‖θ_v − θ_leader‖, R_v − R_leader)` of each clan member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoration {
    pub entries: Vec<(f64, f64)>,
}

impl Decoration {
    /// Mean angular offset over the members other than the leader.
    pub fn mean_angular_offset(&self) -> Option<f64> {
        let others: Vec<f64> = self.entries.iter().filter(|e| e.1 < 0.0).map(|e| e.0).collect();
        (!others.is_empty()).then(|| others.iter().sum::<f64>() / others.len() as f64)
    }
}

/// Groups the snapshot by time-`(t − r)` ancestor.
///
/// Clans are returned in increasing ancestor id order. For `r ≥ t` there is
/// a single clan whose ancestor is the root. When a branch happens exactly
/// at `t − r` the daughters count as the ancestors, so the two sides of
/// that branch form separate clans.
pub fn clan_partition(g: &Genealogy, s: &Snapshot, r: f64) -> Result<Vec<Clan>> {
    if !(r > 0.0) {
        return Err(ExtremalError::BadLookback(r));
    }
    let split = (s.time - r).max(0.0);
    let mut groups: BTreeMap<ParticleId, Vec<usize>> = BTreeMap::new();
    for (i, &id) in s.ids().iter().enumerate() {
        let a = if r >= s.time { 0 } else { g.ancestor_at(id, split)? };
        groups.entry(a).or_default().push(i);
    }
    let clans = groups
        .into_iter()
        .map(|(ancestor_id, idx)| {
            let mut leader = (ParticleId::MAX, f64::NEG_INFINITY);
            let mut member_ids = Vec::with_capacity(idx.len());
            for i in idx {
                let id = s.ids()[i];
                let rr = norm(s.position(i));
                if rr > leader.1 || (rr == leader.1 && id < leader.0) {
                    leader = (id, rr);
                }
                member_ids.push(id);
            }
            member_ids.sort_unstable();
            Clan { leader_id: leader.0, leader_norm: leader.1, member_ids, ancestor_id, r }
        })
        .collect();
    Ok(clans)
}

pub fn decoration_of(c: &Clan, s: &Snapshot) -> Result<Decoration> {
    let locate = |id: ParticleId| -> Result<&[f64]> {
        s.index_of(id)
            .map(|i| s.position(i))
            .ok_or(ExtremalError::NotInSnapshot(id))
    };
    let lp = polar_decompose(&Position { coords: locate(c.leader_id)?.to_vec() })?;
    let mut entries = Vec::with_capacity(c.member_ids.len());
    for &id in &c.member_ids {
        if id == c.leader_id {
            entries.push((0.0, 0.0));
            continue;
        }
        let p = polar_decompose(&Position { coords: locate(id)?.to_vec() })?;
        let dtheta = sphere_distance(&p.theta, &lp.theta)?;
        entries.push((dtheta, p.r - lp.r));
    }
    Ok(Decoration { entries })
}
