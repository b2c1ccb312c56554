use std::collections::HashMap;
use std::io::Write;

use bbm_core::ParticleId;

use crate::{Clan, ExtremalPoint, Result};

pub const CSV_SCHEMA: &str = "extremal/1";

/// Writes one row per extremal point:
/// `replica,particle_id,theta_0..theta_{d-1},height,clan_id,is_leader`.
///
/// The clan id is the id of the clan's time-`(t − r)` ancestor; points not
/// covered by `clans` get an empty clan id. The first line is
/// `#schema=extremal/1`.
pub fn write_extremal_csv<W: Write>(
    mut w: W,
    replica: u64,
    points: &[ExtremalPoint],
    clans: &[Clan],
    header: bool,
) -> Result<()> {
    let d = points.first().map_or(0, |p| p.theta.len());
    if header {
        writeln!(w, "#schema={CSV_SCHEMA}")?;
        write!(w, "replica,particle_id")?;
        for k in 0..d {
            write!(w, ",theta_{k}")?;
        }
        writeln!(w, ",height,clan_id,is_leader")?;
    }
    let mut clan_of: HashMap<ParticleId, (ParticleId, bool)> = HashMap::new();
    for c in clans {
        for &m in &c.member_ids {
            clan_of.insert(m, (c.ancestor_id, m == c.leader_id));
        }
    }
    for p in points {
        write!(w, "{replica},{}", p.particle_id)?;
        for c in &p.theta {
            write!(w, ",{c}")?;
        }
        match clan_of.get(&p.particle_id) {
            Some((cid, lead)) => writeln!(w, ",{},{cid},{}", p.height, u8::from(*lead))?,
            None => writeln!(w, ",{},,0", p.height)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_header() {
        let pts = vec![
            ExtremalPoint { particle_id: 3, theta: vec![1.0, 0.0], height: -0.5 },
            ExtremalPoint { particle_id: 4, theta: vec![0.0, 1.0], height: 0.25 },
        ];
        let clans = vec![Clan {
            leader_id: 4,
            leader_norm: 2.0,
            member_ids: vec![3, 4],
            ancestor_id: 1,
            r: 1.0,
        }];
        let mut buf = Vec::new();
        write_extremal_csv(&mut buf, 7, &pts, &clans, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "#schema=extremal/1");
        assert_eq!(lines[1], "replica,particle_id,theta_0,theta_1,height,clan_id,is_leader");
        assert_eq!(lines[2], "7,3,1,0,-0.5,1,0");
        assert_eq!(lines[3], "7,4,0,1,0.25,1,1");
    }
}
