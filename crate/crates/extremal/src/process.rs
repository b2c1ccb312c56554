use bbm_core::{norm, ParticleId, Snapshot};
use serde::{Deserialize, Serialize};

use crate::{centring, ExtremalError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalPoint {
    pub particle_id: ParticleId,
    pub theta: Vec<f64>,
    /// `R_t − m_t^(d)`.
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtremalProcess {
    pub points: Vec<ExtremalPoint>,
    /// Particles at the origin, which have no direction and are skipped.
    pub excluded_at_origin: usize,
}

impl ExtremalProcess {
    pub fn max_height(&self) -> Option<f64> {
        self.points.iter().map(|p| p.height).reduce(f64::max)
    }
}

/// One point `(θ_u, R_u − m_t^(d))` per alive particle.
pub fn extremal_process(s: &Snapshot, d: usize) -> Result<ExtremalProcess> {
    if s.dim() != d {
        return Err(bbm_core::CoreError::DimensionMismatch { expected: d, got: s.dim() }.into());
    }
    let m = centring(d, s.time)?;
    let mut out = ExtremalProcess { points: Vec::with_capacity(s.len()), excluded_at_origin: 0 };
    for (id, x) in s.iter() {
        let r = norm(x);
        if r == 0.0 {
            out.excluded_at_origin += 1;
            continue;
        }
        out.points.push(ExtremalPoint {
            particle_id: id,
            theta: x.iter().map(|c| c / r).collect(),
            height: r - m,
        });
    }
    Ok(out)
}

/// `(argmax, R*_t)`; ties go to the smallest id.
pub fn rmax(s: &Snapshot) -> Result<(ParticleId, f64)> {
    let mut best: Option<(ParticleId, f64)> = None;
    for (id, x) in s.iter() {
        let r = norm(x);
        best = match best {
            Some((bid, br)) if br > r || (br == r && bid < id) => Some((bid, br)),
            _ => Some((id, r)),
        };
    }
    best.ok_or(ExtremalError::EmptySnapshot)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(t: f64, pts: &[(u64, [f64; 2])]) -> Snapshot {
        let mut s = Snapshot::new(t, 2);
        for (id, x) in pts {
            s.push(*id, x);
        }
        s
    }

    #[test]
    fn particle_on_centring_has_zero_height() {
        let t = 9.0;
        let m = centring(2, t).unwrap();
        let s = snap(t, &[(0, [0.0, m])]);
        let e = extremal_process(&s, 2).unwrap();
        assert_eq!(e.points.len(), 1);
        assert!(e.points[0].height.abs() < 1e-12);
        assert_eq!(e.points[0].theta, vec![0.0, 1.0]);
    }

    #[test]
    fn cardinality_and_max_consistency() {
        let s = snap(5.0, &[(1, [1.0, 2.0]), (4, [-3.0, 0.5]), (7, [0.1, 0.1])]);
        let e = extremal_process(&s, 2).unwrap();
        assert_eq!(e.points.len(), s.len());
        let (_, r) = rmax(&s).unwrap();
        assert!((e.max_height().unwrap() - (r - centring(2, 5.0).unwrap())).abs() < 1e-12);
    }

    #[test]
    fn origin_is_excluded_and_counted() {
        let s = snap(2.0, &[(0, [0.0, 0.0]), (1, [1.0, 0.0])]);
        let e = extremal_process(&s, 2).unwrap();
        assert_eq!(e.points.len(), 1);
        assert_eq!(e.excluded_at_origin, 1);
    }

    #[test]
    fn rmax_rules() {
        assert!(matches!(rmax(&Snapshot::new(1.0, 2)), Err(ExtremalError::EmptySnapshot)));
        assert_eq!(rmax(&snap(1.0, &[(3, [0.0, 2.0])])).unwrap(), (3, 2.0));
        let tie = snap(1.0, &[(9, [3.0, 4.0]), (2, [0.0, -5.0]), (5, [4.0, 3.0])]);
        assert_eq!(rmax(&tie).unwrap(), (2, 5.0));
    }
}
