use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use bbm_core::records::{write_genealogy, write_snapshot};
use bbm_core::{PruneRule, RunConfig};
use bbm_extremal::{clan_partition, extremal_process, write_extremal_csv};
use bbm_martingale::{default_grid, MartingaleField};
use bbm_simulate::{run_replicas, SimOptions, SimOutput};
use bbm_verify::{summarize, write_summaries, Protocol, RunSummary, SummaryOptions, PROTOCOL_FILE};
use rayon::prelude::*;

use crate::config::SimulateKeys;
use crate::manifest::{entry, RunManifest, MANIFEST_SCHEMA, RNG_DESCRIPTION, SUMMARY_SCHEMA};
use crate::SimulateArgs;

pub const SUMMARIES_FILE: &str = "summaries.ndjson";
pub const CONFIG_FILE: &str = "config.json";

pub fn parse_prune(s: &str, horizon: f64) -> Result<Option<PruneRule>> {
    match s {
        "off" => Ok(None),
        "default" => Ok(Some(PruneRule::default_for(horizon))),
        x => {
            let v: f64 = x.parse().with_context(|| format!("--prune must be off, default or a number, got {x:?}"))?;
            if !(v > 0.0) {
                bail!("prune offset must be positive");
            }
            Ok(Some(PruneRule::linear_front(v)))
        }
    }
}

struct Plan {
    cfg: RunConfig,
    replicas: u64,
    out: PathBuf,
    keep: u64,
    opts: SummaryOptions,
    protocol: Protocol,
}

fn plan(a: SimulateArgs, k: SimulateKeys) -> Result<Plan> {
    let d = a.d.or(k.d).context("--d is required")?;
    let t = a.t.or(k.t).context("--t is required")?;
    let replicas = a.replicas.or(k.replicas).context("--replicas is required")?;
    if replicas == 0 {
        bail!("--replicas must be at least 1");
    }
    let seed = a.seed.or(k.seed).unwrap_or(0);
    let out = a.out.or(k.out).context("--out is required")?;
    let mut obs = a.obs_times.or(k.obs_times).unwrap_or_default();
    obs.sort_by(f64::total_cmp);
    obs.dedup();
    let mut cfg = RunConfig::new(d, t, seed).with_observation_times(obs);
    if let Some(rule) = parse_prune(a.prune.or(k.prune).as_deref().unwrap_or("off"), t)? {
        cfg = cfg.with_pruning(rule);
    }
    cfg.validate()?;
    let mut opts = SummaryOptions::for_dim(d);
    if let Some(f) = a.field_times.or(k.field_times) {
        opts.field_times = f;
    }
    if let Some(h) = a.height_floor.or(k.height_floor) {
        opts.height_floor = h;
    }
    if let Some(r) = a.clan_lookback.or(k.clan_lookback) {
        if !(r > 0.0) {
            bail!("--clan-lookback must be positive");
        }
        opts.clan_lookback = r;
    }
    let protocol = match a.protocol.or(k.protocol) {
        Some(p) => serde_json::from_str(&fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?)?,
        None => Protocol::default(),
    };
    let keep = a.keep_records.or(k.keep_records).unwrap_or(replicas.min(10)).min(replicas);
    Ok(Plan { cfg, replicas, out, keep, opts, protocol })
}

fn prepare_dir(out: &Path, force: bool) -> Result<()> {
    if out.exists() {
        let non_empty = fs::read_dir(out)?.next().is_some();
        if non_empty && !force {
            bail!("{} exists and is not empty; pass --force to overwrite", out.display());
        }
        if non_empty {
            fs::remove_dir_all(out)?;
        }
    }
    fs::create_dir_all(out.join("records"))?;
    Ok(())
}

/// Writes the full records of one replica and returns their relative paths
/// (field files first, then the rest).
fn write_records(dir: &Path, p: &Plan, r: u64, out: &SimOutput) -> Result<(Vec<String>, Vec<String>)> {
    let base = format!("records/replica_{r:06}");
    let mut fields = Vec::new();
    let mut other = Vec::new();

    let g = format!("{base}.genealogy.ndjson");
    write_genealogy(&out.genealogy, BufWriter::new(fs::File::create(dir.join(&g))?))?;
    other.push(g);

    let s = format!("{base}.snapshots.ndjson");
    let mut w = BufWriter::new(fs::File::create(dir.join(&s))?);
    for snap in &out.snapshots {
        write_snapshot(snap, &mut w)?;
    }
    drop(w);
    other.push(s);

    let last = out.final_snapshot();
    let mut ep = extremal_process(last, p.cfg.d)?;
    ep.points.retain(|pt| pt.height >= p.opts.height_floor);
    let clans = clan_partition(&out.genealogy, last, p.opts.clan_lookback)?;
    let e = format!("{base}.extremal.csv");
    write_extremal_csv(BufWriter::new(fs::File::create(dir.join(&e))?), r, &ep.points, &clans, true)?;
    other.push(e);

    let grid = default_grid(p.cfg.d)?;
    for snap in out.snapshots.iter().filter(|s| p.opts.field_times.iter().any(|&f| (f - s.time).abs() < 1e-9)) {
        let f = format!("{base}.field_L{}.csv", snap.time);
        let field = MartingaleField::compute(snap, grid.clone())?;
        let mut w = BufWriter::new(fs::File::create(dir.join(&f))?);
        std::io::Write::write_all(&mut w, b"#schema=field/1\n")?;
        field.write_csv(w)?;
        fields.push(f);
    }
    Ok((fields, other))
}

pub fn run(a: SimulateArgs, k: SimulateKeys, threads: usize) -> Result<PathBuf> {
    let force = a.force;
    let p = plan(a, k)?;
    prepare_dir(&p.out, force)?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH)?.as_secs_f64();
    let clock = Instant::now();

    let results: Vec<Result<(RunSummary, Vec<String>)>> = run_replicas(&p.cfg, p.replicas, &SimOptions::default(), |r, out| {
        let mut s = summarize(&p.cfg, r, &out, &p.opts)?;
        let mut files = Vec::new();
        if r < p.keep {
            let (fields, other) = write_records(&p.out, &p, r, &out)?;
            s.field_files = fields.clone();
            files.extend(fields);
            files.extend(other);
        }
        Ok((s, files))
    })?;

    let mut summaries = Vec::with_capacity(results.len());
    let mut rels = Vec::new();
    for res in results {
        let (s, f) = res?;
        summaries.push(s);
        rels.extend(f);
    }
    write_summaries(BufWriter::new(fs::File::create(p.out.join(SUMMARIES_FILE))?), &summaries)?;
    fs::write(
        p.out.join(CONFIG_FILE),
        serde_json::to_string_pretty(&serde_json::json!({ "run": p.cfg, "replicas": p.replicas, "summary": p.opts }))? + "\n",
    )?;
    p.protocol.register(&p.out, false)?;

    let mut all = vec![SUMMARIES_FILE.to_string(), CONFIG_FILE.to_string(), PROTOCOL_FILE.to_string()];
    all.extend(rels);
    let files = all.par_iter().map(|f| entry(&p.out, f)).collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        schema: MANIFEST_SCHEMA,
        summary_schema: SUMMARY_SCHEMA,
        config: p.cfg.clone(),
        replicas: p.replicas,
        summary_options: p.opts.clone(),
        code_version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).to_string(),
        started_unix: started,
        wall_seconds: clock.elapsed().as_secs_f64(),
        threads,
        rng: RNG_DESCRIPTION.to_string(),
        files,
    };
    manifest.save(&p.out)?;
    println!(
        "wrote {} summaries and {} record files to {} in {:.1} s",
        summaries.len(),
        manifest.files.len() - 3,
        p.out.display(),
        manifest.wall_seconds
    );
    Ok(p.out)
}
