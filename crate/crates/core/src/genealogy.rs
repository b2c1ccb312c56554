use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

pub type ParticleId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndKind {
    Branched,
    AliveAtHorizon,
    Pruned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleRecord {
    pub id: ParticleId,
    pub parent_id: Option<ParticleId>,
    pub birth_time: f64,
    pub end_time: f64,
    pub end_kind: EndKind,
}

const NO_CHILD: ParticleId = ParticleId::MAX;

/// Binary branching tree with dense ids `0..len`.
///
/// Records are appended by [`Genealogy::spawn`] and closed by
/// [`Genealogy::close`]; a record that has been spawned but not closed is
/// *open* and carries `end_time = NaN`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Genealogy {
    records: Vec<ParticleRecord>,
    children: Vec<[ParticleId; 2]>,
    horizon: f64,
}

impl Genealogy {
    /// Tree with an open root born at time 0.
    pub fn new(horizon: f64) -> Self {
        let mut g = Self { records: Vec::new(), children: Vec::new(), horizon };
        g.push(None, 0.0);
        g
    }

    pub fn with_capacity(horizon: f64, cap: usize) -> Self {
        let mut g = Self {
            records: Vec::with_capacity(cap),
            children: Vec::with_capacity(cap),
            horizon,
        };
        g.push(None, 0.0);
        g
    }

    fn push(&mut self, parent: Option<ParticleId>, birth: f64) -> ParticleId {
        let id = self.records.len() as ParticleId;
        self.records.push(ParticleRecord {
            id,
            parent_id: parent,
            birth_time: birth,
            end_time: f64::NAN,
            end_kind: EndKind::AliveAtHorizon,
        });
        self.children.push([NO_CHILD; 2]);
        id
    }

    /// Appends a daughter of `parent`, which must already be closed as
    /// branched; she is born at the parent's end time.
    pub fn spawn(&mut self, parent: ParticleId) -> Result<ParticleId> {
        let rec = self.get(parent)?;
        if rec.end_kind != EndKind::Branched || rec.end_time.is_nan() {
            return Err(CoreError::InvalidGenealogy(format!("particle {parent} has not branched")));
        }
        let birth = rec.end_time;
        let slot = match self.children[parent as usize] {
            [NO_CHILD, _] => 0,
            [_, NO_CHILD] => 1,
            _ => {
                return Err(CoreError::InvalidGenealogy(format!(
                    "particle {parent} already has two children"
                )))
            }
        };
        let id = self.push(Some(parent), birth);
        self.children[parent as usize][slot] = id;
        Ok(id)
    }

    /// Branches `parent` at time `at`, returning the two daughter ids.
    pub fn branch(&mut self, parent: ParticleId, at: f64) -> Result<[ParticleId; 2]> {
        self.close(parent, at, EndKind::Branched)?;
        Ok([self.spawn(parent)?, self.spawn(parent)?])
    }

    /// Sets the end of an open record.
    pub fn close(&mut self, id: ParticleId, at: f64, kind: EndKind) -> Result<()> {
        let rec = self
            .records
            .get_mut(id as usize)
            .ok_or(CoreError::UnknownParticle(id))?;
        if !rec.end_time.is_nan() {
            return Err(CoreError::InvalidGenealogy(format!("particle {id} closed twice")));
        }
        if !(at > rec.birth_time) && !(kind != EndKind::Branched && at == rec.birth_time) {
            return Err(CoreError::InvalidGenealogy(format!(
                "particle {id} ends at {at} but was born at {}",
                rec.birth_time
            )));
        }
        rec.end_time = at;
        rec.end_kind = kind;
        Ok(())
    }

    /// Rebuilds a genealogy from records, checking every structural invariant.
    pub fn from_records(horizon: f64, mut records: Vec<ParticleRecord>) -> Result<Self> {
        records.sort_by_key(|r| r.id);
        let mut children = vec![[NO_CHILD; 2]; records.len()];
        let mut partial: Vec<Vec<ParticleId>> = vec![Vec::new(); records.len()];
        for (i, r) in records.iter().enumerate() {
            if r.id != i as ParticleId {
                return Err(CoreError::InvalidGenealogy(format!("ids not dense at {}", r.id)));
            }
            if let Some(p) = r.parent_id {
                if p >= r.id {
                    return Err(CoreError::InvalidGenealogy(format!(
                        "parent {p} of {} is not older",
                        r.id
                    )));
                }
                partial[p as usize].push(r.id);
            }
        }
        for (i, kids) in partial.into_iter().enumerate() {
            match kids.len() {
                0 => {}
                2 => children[i] = [kids[0], kids[1]],
                n => {
                    return Err(CoreError::InvalidGenealogy(format!("particle {i} has {n} children")))
                }
            }
        }
        let g = Self { records, children, horizon };
        g.validate()?;
        Ok(g)
    }

    /// Checks the tree invariants; every record must be closed.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CoreError::InvalidGenealogy(m));
        let Some(root) = self.records.first() else {
            return bad("empty genealogy".into());
        };
        if root.parent_id.is_some() || root.birth_time != 0.0 {
            return bad("root must have no parent and birth time 0".into());
        }
        for r in &self.records {
            if r.end_time.is_nan() {
                return bad(format!("particle {} is still open", r.id));
            }
            if r.id != 0 && r.parent_id.is_none() {
                return bad(format!("particle {} has no parent", r.id));
            }
            let kids = self.children(r.id)?;
            if kids.is_none() && self.children[r.id as usize] != [NO_CHILD; 2] {
                return bad(format!("particle {} has one child", r.id));
            }
            match (r.end_kind, kids) {
                (EndKind::Branched, Some(k)) => {
                    for c in k {
                        let cr = &self.records[c as usize];
                        if cr.birth_time != r.end_time {
                            return bad(format!("child {c} born off its parent's branch time"));
                        }
                    }
                }
                (EndKind::Branched, None) => return bad(format!("branched {} has no children", r.id)),
                (_, Some(_)) => return bad(format!("leaf {} has children", r.id)),
                (_, None) => {}
            }
            if r.end_kind == EndKind::Branched && !(r.birth_time < r.end_time) {
                return bad(format!("particle {} has empty lifetime", r.id));
            }
            if r.end_kind == EndKind::AliveAtHorizon && r.end_time != self.horizon {
                return bad(format!("particle {} alive past its end", r.id));
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[ParticleRecord] {
        &self.records
    }

    pub fn get(&self, id: ParticleId) -> Result<&ParticleRecord> {
        self.records.get(id as usize).ok_or(CoreError::UnknownParticle(id))
    }

    pub fn children(&self, id: ParticleId) -> Result<Option<[ParticleId; 2]>> {
        let c = self.children.get(id as usize).ok_or(CoreError::UnknownParticle(id))?;
        Ok((c[0] != NO_CHILD && c[1] != NO_CHILD).then_some(*c))
    }

    pub fn branch_count(&self) -> usize {
        self.children.iter().filter(|c| c[1] != NO_CHILD).count()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &ParticleRecord> + '_ {
        self.records.iter().filter(|r| r.end_kind != EndKind::Branched)
    }

    /// Particles alive at the horizon.
    pub fn alive_at_horizon(&self) -> Vec<ParticleId> {
        self.records
            .iter()
            .filter(|r| r.end_kind == EndKind::AliveAtHorizon)
            .map(|r| r.id)
            .collect()
    }

    /// Whether `id` is alive at `s`: `birth ≤ s < end`, or `end = s` at the horizon.
    pub fn is_alive_at(&self, id: ParticleId, s: f64) -> Result<bool> {
        let r = self.get(id)?;
        Ok(r.birth_time <= s
            && (s < r.end_time || (s == r.end_time && r.end_kind == EndKind::AliveAtHorizon)))
    }

    /// The ancestor of `id` (possibly `id` itself) alive at time `s ≤ birth..end(id)`.
    pub fn ancestor_at(&self, id: ParticleId, s: f64) -> Result<ParticleId> {
        let mut cur = self.get(id)?;
        if s > cur.end_time {
            return Err(CoreError::InvalidGenealogy(format!(
                "time {s} is after the end of particle {id}"
            )));
        }
        while cur.birth_time > s {
            match cur.parent_id {
                Some(p) => cur = &self.records[p as usize],
                None => break,
            }
        }
        Ok(cur.id)
    }

    /// Lowest common ancestor, counting a particle as its own ancestor.
    pub fn lowest_common_ancestor(&self, u: ParticleId, v: ParticleId) -> Result<ParticleId> {
        let mut a = self.get(u)?;
        let mut b = self.get(v)?;
        // Birth times strictly increase along every root-to-leaf path, so the
        // later-born of two distinct nodes is never an ancestor of the other.
        while a.id != b.id {
            let (ta, tb) = (a.birth_time, b.birth_time);
            if ta >= tb {
                a = &self.records[a.parent_id.expect("non-root has parent") as usize];
            }
            if tb >= ta {
                b = &self.records[b.parent_id.expect("non-root has parent") as usize];
            }
        }
        Ok(a.id)
    }

    /// `u ∧ v`: the last time `u` and `v` share an ancestor.
    ///
    /// For `u = v` this is the end time of `u`, i.e. the horizon for a
    /// particle alive at the horizon.
    pub fn mrca_time(&self, u: ParticleId, v: ParticleId) -> Result<f64> {
        let w = self.lowest_common_ancestor(u, v)?;
        Ok(self.records[w as usize].end_time)
    }

    /// All descendants of `id` (including itself) that are leaves.
    pub fn leaf_descendants(&self, id: ParticleId) -> Result<Vec<ParticleId>> {
        self.get(id)?;
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            match self.children(x)? {
                Some([a, b]) => {
                    stack.push(b);
                    stack.push(a);
                }
                None => out.push(x),
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    /// ((0 → 1,2 @1), (1 → 3,4 @2), (2 → 5,6 @1.5), (4 → 7,8 @3), (6 → 9,10 @2.5))
    pub(crate) fn ten_ish_tree() -> Genealogy {
        let mut g = Genealogy::new(4.0);
        let [a, b] = g.branch(0, 1.0).unwrap();
        let [c, d] = g.branch(a, 2.0).unwrap();
        let [e, f] = g.branch(b, 1.5).unwrap();
        let [h, i] = g.branch(d, 3.0).unwrap();
        let [j, k] = g.branch(f, 2.5).unwrap();
        for leaf in [c, e, h, i, j, k] {
            g.close(leaf, 4.0, EndKind::AliveAtHorizon).unwrap();
        }
        g.validate().unwrap();
        g
    }

    fn ancestor_set(g: &Genealogy, mut id: ParticleId) -> HashSet<ParticleId> {
        let mut s = HashSet::new();
        loop {
            s.insert(id);
            match g.get(id).unwrap().parent_id {
                Some(p) => id = p,
                None => return s,
            }
        }
    }

    /// Brute force: intersect ancestor sets, take the member with the latest end.
    fn oracle_mrca(g: &Genealogy, u: ParticleId, v: ParticleId) -> f64 {
        let common: Vec<_> = ancestor_set(g, u).intersection(&ancestor_set(g, v)).copied().collect();
        common
            .iter()
            .map(|&w| g.get(w).unwrap().end_time)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn self_mrca_is_horizon() {
        let g = ten_ish_tree();
        for id in g.alive_at_horizon() {
            assert_eq!(g.mrca_time(id, id).unwrap(), 4.0);
        }
    }

    #[test]
    fn siblings_meet_at_branch_time() {
        let g = ten_ish_tree();
        assert_eq!(g.mrca_time(7, 8).unwrap(), 3.0);
        assert_eq!(g.mrca_time(9, 10).unwrap(), 2.5);
        assert_eq!(g.mrca_time(5, 6).unwrap(), 1.5);
    }

    #[test]
    fn root_against_every_particle_matches_oracle() {
        let g = ten_ish_tree();
        assert_eq!(g.len(), 11);
        for v in 0..g.len() as u64 {
            assert_eq!(g.mrca_time(0, v).unwrap(), oracle_mrca(&g, 0, v));
            assert_eq!(g.mrca_time(0, v).unwrap(), 1.0);
        }
        for u in 0..11 {
            for v in 0..11 {
                assert_eq!(g.mrca_time(u, v).unwrap(), oracle_mrca(&g, u, v), "{u} {v}");
            }
        }
    }

    #[test]
    fn unknown_id_is_an_error() {
        let g = ten_ish_tree();
        assert!(matches!(g.mrca_time(0, 99), Err(CoreError::UnknownParticle(99))));
    }

    #[test]
    fn ancestor_lookup() {
        let g = ten_ish_tree();
        assert_eq!(g.ancestor_at(7, 0.5).unwrap(), 0);
        assert_eq!(g.ancestor_at(7, 1.0).unwrap(), 1);
        assert_eq!(g.ancestor_at(7, 2.5).unwrap(), 4);
        assert_eq!(g.ancestor_at(7, 4.0).unwrap(), 7);
        assert!(g.is_alive_at(7, 4.0).unwrap());
        assert!(!g.is_alive_at(4, 3.0).unwrap());
        assert!(g.is_alive_at(4, 2.0).unwrap());
    }

    #[test]
    fn invalid_structures_are_rejected() {
        let mut g = Genealogy::new(1.0);
        assert!(g.validate().is_err());
        g.close(0, 1.0, EndKind::AliveAtHorizon).unwrap();
        assert!(g.close(0, 1.0, EndKind::AliveAtHorizon).is_err());
        g.validate().unwrap();

        let mut recs = ten_ish_tree().records().to_vec();
        recs[3].birth_time = 2.1;
        assert!(Genealogy::from_records(4.0, recs).is_err());
        let mut recs = ten_ish_tree().records().to_vec();
        recs.pop();
        assert!(Genealogy::from_records(4.0, recs).is_err());
    }

    #[test]
    fn spawn_requires_branched_parent() {
        let mut g = Genealogy::new(2.0);
        assert!(g.spawn(0).is_err());
        g.close(0, 1.0, EndKind::Branched).unwrap();
        let a = g.spawn(0).unwrap();
        assert!(g.validate().is_err());
        g.close(a, 2.0, EndKind::AliveAtHorizon).unwrap();
        let b = g.spawn(0).unwrap();
        assert!(g.spawn(0).is_err());
        g.close(b, 2.0, EndKind::AliveAtHorizon).unwrap();
        g.validate().unwrap();
        assert_eq!(g.get(b).unwrap().birth_time, 1.0);
    }

    #[test]
    fn from_records_round_trip() {
        let g = ten_ish_tree();
        let h = Genealogy::from_records(4.0, g.records().to_vec()).unwrap();
        assert_eq!(g, h);
    }

    /// Random tree: repeatedly branch a random open leaf at a later time.
    fn random_tree(choices: &[(u8, f64)], horizon: f64) -> Genealogy {
        let mut g = Genealogy::new(horizon);
        let mut open = vec![(0u64, 0.0f64)];
        for &(pick, frac) in choices {
            let i = pick as usize % open.len();
            let (id, birth) = open[i];
            let at = birth + (horizon - birth) * frac;
            if at <= birth || at >= horizon {
                continue;
            }
            let [a, b] = g.branch(id, at).unwrap();
            open.swap_remove(i);
            open.push((a, at));
            open.push((b, at));
        }
        for (id, _) in open {
            g.close(id, horizon, EndKind::AliveAtHorizon).unwrap();
        }
        g
    }

    proptest! {
        #[test]
        fn binary_tree_identity(choices in prop::collection::vec((any::<u8>(), 0.01f64..0.99), 0..63)) {
            let g = random_tree(&choices, 10.0);
            g.validate().unwrap();
            prop_assert_eq!(g.leaves().count(), g.branch_count() + 1);
        }

        #[test]
        fn mrca_symmetric_and_ultrametric(choices in prop::collection::vec((any::<u8>(), 0.01f64..0.99), 0..40)) {
            let g = random_tree(&choices, 10.0);
            let leaves = g.alive_at_horizon();
            prop_assert!(leaves.len() <= 64);
            for &u in &leaves {
                for &v in &leaves {
                    let uv = g.mrca_time(u, v).unwrap();
                    prop_assert_eq!(uv, g.mrca_time(v, u).unwrap());
                    prop_assert_eq!(uv, oracle_mrca(&g, u, v));
                    for &w in &leaves {
                        let vw = g.mrca_time(v, w).unwrap();
                        let uw = g.mrca_time(u, w).unwrap();
                        prop_assert!(uv.min(vw) <= uw);
                    }
                }
            }
        }
    }
}
