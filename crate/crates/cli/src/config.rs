//! Optional TOML config file whose keys stand in for command-line flags.
//! Flags given on the command line take precedence.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub simulate: SimulateKeys,
    #[serde(default)]
    pub fkpp: FkppKeys,
    #[serde(default)]
    pub verify: VerifyKeys,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateKeys {
    pub d: Option<usize>,
    pub t: Option<f64>,
    pub replicas: Option<u64>,
    pub seed: Option<u64>,
    pub obs_times: Option<Vec<f64>>,
    pub prune: Option<String>,
    pub out: Option<PathBuf>,
    pub keep_records: Option<u64>,
    pub field_times: Option<Vec<f64>>,
    pub height_floor: Option<f64>,
    pub clan_lookback: Option<f64>,
    pub protocol: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FkppKeys {
    pub gamma: Option<bool>,
    pub cphi: Option<Vec<String>>,
    pub ell_max: Option<f64>,
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub weight: Option<String>,
    pub registry: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyKeys {
    pub run: Option<PathBuf>,
    pub registry: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub protocol: Option<PathBuf>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_rejects_unknown_keys() {
        let c: FileConfig = toml::from_str("[simulate]\nd = 2\nobs_times = [4.0, 6.0]\n[fkpp]\ngamma = true\n").unwrap();
        assert_eq!(c.simulate.d, Some(2));
        assert_eq!(c.simulate.obs_times, Some(vec![4.0, 6.0]));
        assert_eq!(c.fkpp.gamma, Some(true));
        assert!(toml::from_str::<FileConfig>("[simulate]\nbogus = 1\n").is_err());
    }
}
