use std::collections::HashSet;

use crate::genealogy::{EndKind, Genealogy, ParticleId};
use crate::geometry::{norm, Position};
use crate::{CoreError, Result};

/// Positions of the particles alive at one time, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    dim: usize,
    ids: Vec<ParticleId>,
    coords: Vec<f64>,
    sorted: bool,
}

impl Snapshot {
    pub fn new(time: f64, dim: usize) -> Self {
        assert!(dim >= 1);
        Self { time, dim, ids: Vec::new(), coords: Vec::new(), sorted: true }
    }

    pub fn with_capacity(time: f64, dim: usize, cap: usize) -> Self {
        assert!(dim >= 1);
        Self {
            time,
            dim,
            ids: Vec::with_capacity(cap),
            coords: Vec::with_capacity(cap * dim),
            sorted: true,
        }
    }

    /// Builds a snapshot from `(id, position)` pairs.
    pub fn from_entries(time: f64, dim: usize, entries: Vec<(ParticleId, Position)>) -> Result<Self> {
        let mut s = Self::new(time, dim);
        for (id, p) in entries {
            if p.dim() != dim {
                return Err(CoreError::DimensionMismatch { expected: dim, got: p.dim() });
            }
            s.push(id, &p.coords);
        }
        s.check_unique()?;
        Ok(s)
    }

    pub fn push(&mut self, id: ParticleId, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        if let Some(&last) = self.ids.last() {
            self.sorted &= last < id;
        }
        self.ids.push(id);
        self.coords.extend_from_slice(x);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[ParticleId] {
        &self.ids
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParticleId, &[f64])> + '_ {
        self.ids.iter().copied().zip(self.coords.chunks_exact(self.dim))
    }

    pub fn norms(&self) -> Vec<f64> {
        self.coords.chunks_exact(self.dim).map(norm).collect()
    }

    /// Index of `id` within the snapshot.
    pub fn index_of(&self, id: ParticleId) -> Option<usize> {
        if self.sorted {
            self.ids.binary_search(&id).ok()
        } else {
            self.ids.iter().position(|&x| x == id)
        }
    }

    /// Reorders entries by particle id.
    pub fn sort_by_id(&mut self) {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| self.ids[i]);
        let ids = order.iter().map(|&i| self.ids[i]).collect();
        let mut coords = Vec::with_capacity(self.coords.len());
        for &i in &order {
            coords.extend_from_slice(self.position(i));
        }
        self.ids = ids;
        self.coords = coords;
        self.sorted = true;
    }

    /// Multiplies every position by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            time: self.time,
            dim: self.dim,
            ids: self.ids.clone(),
            coords: self.coords.iter().map(|c| c * lambda).collect(),
            sorted: self.sorted,
        }
    }

    fn check_unique(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.len());
        for &id in &self.ids {
            if !seen.insert(id) {
                return Err(CoreError::InvalidSnapshot(format!("duplicate particle {id}")));
            }
        }
        Ok(())
    }

    /// Checks that the snapshot holds exactly the non-pruned particles of
    /// `g` alive at `self.time`, with finite coordinates.
    pub fn validate_against(&self, g: &Genealogy) -> Result<()> {
        self.check_unique()?;
        if self.coords.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::NonFinite);
        }
        for &id in &self.ids {
            if !g.is_alive_at(id, self.time)? {
                return Err(CoreError::InvalidSnapshot(format!(
                    "particle {id} is not alive at {}",
                    self.time
                )));
            }
        }
        let expected = g
            .records()
            .iter()
            .filter(|r| {
                r.birth_time <= self.time
                    && (self.time < r.end_time
                        || (self.time == r.end_time && r.end_kind == EndKind::AliveAtHorizon))
            })
            .count();
        if expected != self.len() {
            return Err(CoreError::InvalidSnapshot(format!(
                "{} particles alive at {} but snapshot has {}",
                expected,
                self.time,
                self.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_rejected() {
        let p = Position::new(vec![1.0, 2.0]).unwrap();
        assert!(Snapshot::from_entries(1.0, 2, vec![(3, p.clone()), (3, p)]).is_err());
    }

    #[test]
    fn sort_and_scale() {
        let mut s = Snapshot::new(1.0, 2);
        s.push(5, &[1.0, 0.0]);
        s.push(2, &[0.0, 3.0]);
        assert_eq!(s.index_of(2), Some(1));
        s.sort_by_id();
        assert_eq!(s.ids(), &[2, 5]);
        assert_eq!(s.index_of(5), Some(1));
        assert_eq!(s.index_of(4), None);
        assert_eq!(s.position(0), &[0.0, 3.0]);
        assert_eq!(s.scaled(2.0).norms(), vec![6.0, 2.0]);
    }

    #[test]
    fn validate_counts_alive_particles() {
        let mut g = Genealogy::new(2.0);
        let [a, b] = g.branch(0, 1.0).unwrap();
        g.close(a, 2.0, EndKind::AliveAtHorizon).unwrap();
        g.close(b, 2.0, EndKind::AliveAtHorizon).unwrap();
        let mut s = Snapshot::new(2.0, 1);
        s.push(a, &[0.5]);
        assert!(s.validate_against(&g).is_err());
        s.push(b, &[-0.5]);
        s.validate_against(&g).unwrap();
        let mut early = Snapshot::new(0.5, 1);
        early.push(a, &[0.0]);
        assert!(early.validate_against(&g).is_err());
    }
}
