use std::collections::BTreeSet;
use std::fs;
use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};
use bbm_core::RunConfig;
use bbm_verify::SummaryOptions;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA: u32 = 1;
pub const SUMMARY_SCHEMA: u32 = 1;
/// CSV schemas this build reads and writes.
pub const CSV_SCHEMAS: &[&str] = &[bbm_extremal::CSV_SCHEMA, "field/1"];

pub const RNG_DESCRIPTION: &str =
    "counter-based SplitMix64 streams keyed by (seed, replica, particle id); one stream per particle";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub summary_schema: u32,
    pub config: RunConfig,
    pub replicas: u64,
    pub summary_options: SummaryOptions,
    pub code_version: String,
    pub started_unix: f64,
    pub wall_seconds: f64,
    pub threads: usize,
    pub rng: String,
    pub files: Vec<FileEntry>,
}

pub fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let mut f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut n = 0u64;
    loop {
        let k = f.read(&mut buf)?;
        if k == 0 {
            break;
        }
        h.update(&buf[..k]);
        n += k as u64;
    }
    Ok((hex::encode(h.finalize()), n))
}

pub fn entry(dir: &Path, rel: &str) -> Result<FileEntry> {
    let (sha256, bytes) = sha256_file(&dir.join(rel))?;
    Ok(FileEntry { path: rel.to_string(), sha256, bytes })
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let m: RunManifest = serde_json::from_str(
            &fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?,
        )
        .with_context(|| format!("parsing {}", path.display()))?;
        if m.schema != MANIFEST_SCHEMA {
            bail!("manifest schema {} is not the supported {}", m.schema, MANIFEST_SCHEMA);
        }
        if m.summary_schema != SUMMARY_SCHEMA {
            bail!("summary schema {} is not the supported {}", m.summary_schema, SUMMARY_SCHEMA);
        }
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    /// Recomputes every checksum and fails on the first mismatch.
    pub fn check_files(&self, dir: &Path) -> Result<()> {
        for f in &self.files {
            let (sha, bytes) = sha256_file(&dir.join(&f.path))?;
            if sha != f.sha256 || bytes != f.bytes {
                bail!("checksum mismatch for {}", f.path);
            }
        }
        Ok(())
    }

    /// Every declared CSV must open with a `#schema=` line this build supports.
    pub fn check_csv_schemas(&self, dir: &Path) -> Result<()> {
        for f in self.files.iter().filter(|f| f.path.ends_with(".csv")) {
            let text = fs::read_to_string(dir.join(&f.path))?;
            let first = text.lines().next().unwrap_or("");
            let schema = first.strip_prefix("#schema=").with_context(|| format!("{} has no #schema line", f.path))?;
            if !CSV_SCHEMAS.contains(&schema) {
                bail!("{} has schema {schema}; this build supports {}", f.path, CSV_SCHEMAS.join(", "));
            }
        }
        Ok(())
    }

    /// Fails unless every path in `needed` is declared.
    pub fn require(&self, needed: &[&str]) -> Result<()> {
        let have: BTreeSet<&str> = self.files.iter().map(|f| f.path.as_str()).collect();
        let missing: Vec<&str> = needed.iter().copied().filter(|p| !have.contains(p)).collect();
        if !missing.is_empty() {
            bail!("inputs not declared in the manifest: {}", missing.join(", "));
        }
        Ok(())
    }

    pub fn upsert_file(&mut self, dir: &Path, rel: &str) -> Result<()> {
        let e = entry(dir, rel)?;
        match self.files.iter_mut().find(|f| f.path == rel) {
            Some(f) => *f = e,
            None => self.files.push(e),
        }
        Ok(())
    }
}
