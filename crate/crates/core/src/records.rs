//! Newline-delimited JSON persistence for genealogies and snapshots.
//!
//! Each file starts with a header object followed by one object per line.
//!
//! ```text
//! {"kind":"genealogy","schema":1,"horizon":12.0,"count":3}
//! {"id":0,"parent_id":null,"birth_time":0.0,"end_time":0.7,"end_kind":"branched"}
//! ...
//! {"kind":"snapshot","schema":1,"time":12.0,"dim":2,"count":2}
//! {"id":1,"x":[0.3,-1.2]}
//! ...
//! ```

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::genealogy::{Genealogy, ParticleId, ParticleRecord};
use crate::snapshot::Snapshot;
use crate::{CoreError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct GenealogyHeader {
    kind: String,
    schema: u32,
    horizon: f64,
    count: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotHeader {
    kind: String,
    schema: u32,
    time: f64,
    dim: usize,
    count: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotLine {
    id: ParticleId,
    x: Vec<f64>,
}

pub fn write_genealogy<W: Write>(g: &Genealogy, mut w: W) -> Result<()> {
    let header = GenealogyHeader {
        kind: "genealogy".into(),
        schema: SCHEMA_VERSION,
        horizon: g.horizon(),
        count: g.len(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for r in g.records() {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

fn next_line<R: BufRead>(lines: &mut std::io::Lines<R>, what: &str) -> Result<String> {
    lines
        .next()
        .ok_or_else(|| CoreError::Format(format!("unexpected end of file reading {what}")))?
        .map_err(CoreError::from)
}

fn check_header(kind: &str, expected: &str, schema: u32) -> Result<()> {
    if kind != expected {
        return Err(CoreError::Format(format!("expected {expected} header, found {kind}")));
    }
    if schema != SCHEMA_VERSION {
        return Err(CoreError::Format(format!(
            "schema version {schema} is not supported (expected {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

pub fn read_genealogy<R: BufRead>(r: R) -> Result<Genealogy> {
    let mut lines = r.lines();
    let h: GenealogyHeader = serde_json::from_str(&next_line(&mut lines, "header")?)?;
    check_header(&h.kind, "genealogy", h.schema)?;
    let mut recs = Vec::with_capacity(h.count);
    for _ in 0..h.count {
        let rec: ParticleRecord = serde_json::from_str(&next_line(&mut lines, "record")?)?;
        recs.push(rec);
    }
    Genealogy::from_records(h.horizon, recs)
}

pub fn write_snapshot<W: Write>(s: &Snapshot, mut w: W) -> Result<()> {
    let header = SnapshotHeader {
        kind: "snapshot".into(),
        schema: SCHEMA_VERSION,
        time: s.time,
        dim: s.dim(),
        count: s.len(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for (id, x) in s.iter() {
        serde_json::to_writer(&mut w, &SnapshotLine { id, x: x.to_vec() })?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads one snapshot; several snapshots may be concatenated in one stream.
pub fn read_snapshot<R: BufRead>(lines: &mut std::io::Lines<R>) -> Result<Option<Snapshot>> {
    let Some(first) = lines.next() else {
        return Ok(None);
    };
    let first = first?;
    if first.trim().is_empty() {
        return Ok(None);
    }
    let h: SnapshotHeader = serde_json::from_str(&first)?;
    check_header(&h.kind, "snapshot", h.schema)?;
    let mut s = Snapshot::new(h.time, h.dim);
    for _ in 0..h.count {
        let line: SnapshotLine = serde_json::from_str(&next_line(lines, "snapshot entry")?)?;
        if line.x.len() != h.dim {
            return Err(CoreError::DimensionMismatch { expected: h.dim, got: line.x.len() });
        }
        s.push(line.id, &line.x);
    }
    Ok(Some(s))
}

pub fn read_snapshots<R: BufRead>(r: R) -> Result<Vec<Snapshot>> {
    let mut lines = r.lines();
    let mut out = Vec::new();
    while let Some(s) = read_snapshot(&mut lines)? {
        out.push(s);
    }
    Ok(out)
}
