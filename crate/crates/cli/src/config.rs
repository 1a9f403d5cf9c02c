//! TOML run configuration.
//!
//! Relative paths in `[output]` are resolved against the directory of the
//! config file. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use lnqmc::embedding::BjMode;
use lnqmc::estimators::Method;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Worker threads; 0 lets rayon decide. Results do not depend on it.
    #[serde(default)]
    pub threads: usize,
    pub covariance: CovarianceSection,
    pub grid: GridSection,
    pub mesh: MeshSection,
    pub method: MethodSection,
    pub seeds: SeedSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceSection {
    pub variance: f64,
    pub corr_length: f64,
    pub smoothness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub m0: usize,
    /// Largest padded size tried; defaults to 64·m0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub k: usize,
    /// Averaging box; the whole domain when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qoi_lo: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qoi_hi: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Mc,
    Qmc,
}

impl From<MethodKind> for Method {
    fn from(k: MethodKind) -> Self {
        match k {
            MethodKind::Mc => Method::Mc,
            MethodKind::Qmc => Method::Qmc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BjKind {
    #[default]
    Exact,
    Bound,
}

impl From<BjKind> for BjMode {
    fn from(k: BjKind) -> Self {
        match k {
            BjKind::Exact => BjMode::Exact,
            BjKind::Bound => BjMode::Bound,
        }
    }
}

fn default_q() -> usize {
    16
}

fn default_kappa() -> f64 {
    lnqmc::lattice::DEFAULT_KAPPA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    pub kind: MethodKind,
    /// Lattice sizes for qmc, sample counts for mc. `run` uses the last one.
    pub n: Vec<usize>,
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub bj: BjKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    pub master: u64,
    #[serde(default)]
    pub tail: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub embedding: PathBuf,
    /// Directory holding `gv_n<n>.txt` files.
    pub gv_dir: PathBuf,
    pub csv: PathBuf,
}

impl RunConfig {
    #[cfg(test)]
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Self::from_table(text.parse::<toml::Table>().map_err(|e| CliError::Config(e.to_string()))?)
    }

    fn from_table(table: toml::Table) -> Result<Self, CliError> {
        let cfg: Self = table.try_into().map_err(|e: toml::de::Error| CliError::Config(one_line(&e.to_string())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`, applies `key=value` overrides (dotted keys, TOML values;
    /// bare words are taken as strings) and resolves relative output paths.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(one_line(&e.to_string())))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg = Self::from_table(table)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.output.embedding, &mut cfg.output.gv_dir, &mut cfg.output.csv] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn m_cap(&self) -> usize {
        self.grid.m_cap.unwrap_or(64 * self.grid.m0)
    }

    pub fn gv_path(&self, n: usize) -> PathBuf {
        self.output.gv_dir.join(format!("gv_n{n}.txt"))
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.method.n.is_empty() {
            return bad("method.n must not be empty".into());
        }
        match self.method.kind {
            MethodKind::Qmc => {
                if let Some(n) = self.method.n.iter().find(|n| !n.is_power_of_two()) {
                    return bad(format!("method.n entry {n} is not a power of 2"));
                }
                if self.method.q < 2 {
                    return bad(format!("method.q must be at least 2, got {}", self.method.q));
                }
            }
            MethodKind::Mc => {
                if let Some(n) = self.method.n.iter().find(|n| **n < 2) {
                    return bad(format!("method.n entry {n} is below 2"));
                }
            }
        }
        if self.mesh.k == 0 {
            return bad("mesh.k must be positive".into());
        }
        for (name, v) in [("mesh.qoi_lo", &self.mesh.qoi_lo), ("mesh.qoi_hi", &self.mesh.qoi_hi)] {
            if let Some(v) = v {
                if v.len() != self.grid.dim {
                    return bad(format!("{name} has {} entries, expected {}", v.len(), self.grid.dim));
                }
            }
        }
        if self.mesh.qoi_lo.is_some() != self.mesh.qoi_hi.is_some() {
            return bad("mesh.qoi_lo and mesh.qoi_hi must be given together".into());
        }
        Ok(())
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not key=value")))?;
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, path) = parts.split_last().unwrap();
    let mut cur = table;
    for p in path {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override key `{key}`: `{p}` is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
threads = 2

[covariance]
variance = 0.25
corr_length = 0.2
smoothness = 2.0

[grid]
dim = 2
m0 = 8

[mesh]
k = 12
qoi_lo = [0.25, 0.25]
qoi_hi = [0.75, 0.75]

[method]
kind = "qmc"
n = [16, 32, 64]
bj = "bound"

[seeds]
master = 3
tail = 5

[output]
embedding = "emb.bin"
gv_dir = "gv"
csv = "study.csv"
"#;

    #[test]
    fn round_trip_is_idempotent() {
        let a = RunConfig::parse(SAMPLE).unwrap();
        let text = a.to_toml();
        let b = RunConfig::parse(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(text, b.to_toml());
        assert_eq!(a.method.q, 16);
        assert_eq!(a.method.kappa, 0.6);
        assert_eq!(a.m_cap(), 512);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = SAMPLE.replace("m0 = 8", "m0 = 8\nspacing = 1");
        assert!(matches!(RunConfig::parse(&text), Err(CliError::Config(_))));
    }

    #[test]
    fn schedule_rules() {
        let text = SAMPLE.replace("n = [16, 32, 64]", "n = [16, 24]");
        assert!(RunConfig::parse(&text).is_err());
        let text = SAMPLE.replace("n = [16, 32, 64]", "n = []");
        assert!(RunConfig::parse(&text).is_err());
        let text = SAMPLE.replace("\"qmc\"", "\"mc\"").replace("n = [16, 32, 64]", "n = [24, 100]");
        assert!(RunConfig::parse(&text).is_ok());
    }

    #[test]
    fn overrides_apply_dotted_keys() {
        let mut t: toml::Table = SAMPLE.parse().unwrap();
        apply_override(&mut t, "grid.m0=12").unwrap();
        apply_override(&mut t, "method.kind=mc").unwrap();
        apply_override(&mut t, "method.n=[10, 20]").unwrap();
        let cfg = RunConfig::from_table(t).unwrap();
        assert_eq!(cfg.grid.m0, 12);
        assert_eq!(cfg.method.kind, MethodKind::Mc);
        assert_eq!(cfg.method.n, vec![10, 20]);
        let mut t: toml::Table = SAMPLE.parse().unwrap();
        assert!(apply_override(&mut t, "grid").is_err());
    }
}
