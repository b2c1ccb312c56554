use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{ConvergenceReport, Result, TailWeight};

/// One stored tail constant with the grid it was computed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistryEntry {
    /// `gamma`, `gamma_star` or `c_phi`.
    pub name: String,
    /// Descriptor of the test function; `step` for γ.
    pub phi: String,
    pub d: Option<usize>,
    pub dx: f64,
    pub dt: f64,
    pub ell_max: f64,
    pub weight: TailWeight,
    pub value: f64,
    pub converged: bool,
    pub ells: Vec<f64>,
    pub values: Vec<f64>,
}

impl RegistryEntry {
    pub fn from_report(name: &str, phi: &str, d: Option<usize>, dx: f64, dt: f64, weight: TailWeight, r: &ConvergenceReport) -> Self {
        RegistryEntry {
            name: name.to_string(),
            phi: phi.to_string(),
            d,
            dx,
            dt,
            ell_max: r.ells.last().copied().unwrap_or(f64::NAN),
            weight,
            value: r.value,
            converged: r.converged,
            ells: r.ells.clone(),
            values: r.values.clone(),
        }
    }

    fn same_key(&self, o: &RegistryEntry) -> bool {
        self.name == o.name
            && self.phi == o.phi
            && self.d == o.d
            && self.dx == o.dx
            && self.dt == o.dt
            && self.ell_max == o.ell_max
            && self.weight == o.weight
    }
}

/// JSON file of tail constants keyed by name, φ descriptor and grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRegistry {
    pub schema: u32,
    pub entries: Vec<RegistryEntry>,
}

impl ConstantsRegistry {
    pub const SCHEMA: u32 = 1;

    pub fn new() -> Self {
        ConstantsRegistry { schema: Self::SCHEMA, entries: Vec::new() }
    }

    /// Reads the registry, or starts an empty one if the file does not exist.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Ok(Self::new());
        }
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    /// Inserts `e`, replacing any entry with the same key.
    pub fn upsert(&mut self, e: RegistryEntry) {
        match self.entries.iter_mut().find(|x| x.same_key(&e)) {
            Some(slot) => *slot = e,
            None => self.entries.push(e),
        }
    }

    /// Most recently inserted entry with this name and φ descriptor.
    pub fn lookup(&self, name: &str, phi: &str) -> Option<&RegistryEntry> {
        self.entries.iter().rev().find(|e| e.name == name && e.phi == phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(value: f64, dx: f64) -> RegistryEntry {
        RegistryEntry {
            name: "gamma".into(),
            phi: "step".into(),
            d: None,
            dx,
            dt: 0.01,
            ell_max: 80.0,
            weight: TailWeight::Sqrt2,
            value,
            converged: true,
            ells: vec![80.0],
            values: vec![value],
        }
    }

    #[test]
    fn upsert_replaces_same_key() {
        let mut r = ConstantsRegistry::new();
        r.upsert(entry(1.0, 0.02));
        r.upsert(entry(2.0, 0.02));
        r.upsert(entry(3.0, 0.01));
        assert_eq!(r.entries.len(), 2);
        assert_eq!(r.entries[0].value, 2.0);
        assert_eq!(r.lookup("gamma", "step").unwrap().value, 3.0);
        assert!(r.lookup("c_phi", "step").is_none());
    }

    #[test]
    fn json_round_trip() {
        let mut r = ConstantsRegistry::new();
        r.upsert(entry(0.123456789012345, 0.02));
        let dir = std::env::temp_dir().join(format!("fkpp-registry-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("constants.json");
        r.save(&p).unwrap();
        assert_eq!(ConstantsRegistry::load(&p).unwrap(), r);
        fs::remove_dir_all(&dir).unwrap();
        assert_eq!(ConstantsRegistry::load(&dir.join("missing.json")).unwrap(), ConstantsRegistry::new());
    }
}
