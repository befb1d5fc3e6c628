use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::ScanSpec;
use crate::error::{Error, Result};
use crate::graph::{Caps, ValidationOptions};
use crate::models::Bath;

pub const CONFIG_SCHEMA: u32 = 1;

/// Run configuration and scan recipe file. Command-line flags override the
/// corresponding fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub preset: Option<String>,
    pub model: Option<String>,
    /// Graph file, relative to the config file.
    pub graph: Option<PathBuf>,
    pub t: Option<f64>,
    pub sigma: Option<f64>,
    /// Replaces the preset baths when building `model`.
    pub baths: Option<Vec<Bath>>,
    #[serde(default)]
    pub scan: Vec<NamedScan>,
    pub caps: Option<CapsConfig>,
    pub tolerances: Option<Tolerances>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedScan {
    pub name: String,
    /// Defaults to the top-level preset.
    pub preset: Option<String>,
    pub model: String,
    #[serde(default)]
    pub sizes: Vec<usize>,
    pub t: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsConfig {
    pub max_trees: Option<usize>,
    pub max_circuits: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of the detailed-balance check on explicit rates.
    pub balance: Option<f64>,
    /// Report PCD and degree violations as errors (default) or warnings.
    pub strict_pcd: Option<bool>,
    /// Relative tolerance of the `--check` equalities.
    pub check: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str, path: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_string(),
            message: e.to_string(),
        })?;
        if cfg.schema != CONFIG_SCHEMA {
            return Err(Error::Parse {
                path: path.to_string(),
                message: format!(
                    "schema: unsupported version {} (expected {CONFIG_SCHEMA})",
                    cfg.schema
                ),
            });
        }
        Ok(cfg)
    }

    /// Reads a config; a relative `graph` path is resolved against the file's directory.
    pub fn read(path: &Path) -> Result<RunConfig> {
        let mut cfg =
            RunConfig::parse(&std::fs::read_to_string(path)?, &path.display().to_string())?;
        if let (Some(g), Some(dir)) = (&cfg.graph, path.parent()) {
            if g.is_relative() {
                cfg.graph = Some(dir.join(g));
            }
        }
        Ok(cfg)
    }

    pub fn caps(&self) -> Caps {
        let mut caps = Caps::default();
        if let Some(c) = self.caps {
            caps.max_trees = c.max_trees.unwrap_or(caps.max_trees);
            caps.max_circuits = c.max_circuits.unwrap_or(caps.max_circuits);
        }
        caps
    }

    pub fn validation(&self) -> ValidationOptions {
        let mut opts = ValidationOptions::default();
        if let Some(t) = self.tolerances {
            opts.balance_tol = t.balance.unwrap_or(opts.balance_tol);
            opts.strict_pcd = t.strict_pcd.unwrap_or(opts.strict_pcd);
        }
        opts
    }

    pub fn check_tolerance(&self) -> f64 {
        self.tolerances.and_then(|t| t.check).unwrap_or(1e-9)
    }

    /// Scan grids with presets resolved.
    pub fn scans(&self) -> Result<Vec<(String, ScanSpec)>> {
        self.scan
            .iter()
            .map(|s| {
                let preset = s
                    .preset
                    .clone()
                    .or_else(|| self.preset.clone())
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "scan '{}' needs a preset (in the scan or at top level)",
                            s.name
                        ))
                    })?;
                let spec = ScanSpec {
                    preset,
                    model: s.model.clone(),
                    sizes: s.sizes.clone(),
                    t: s.t.clone(),
                    sigma: s.sigma.clone().unwrap_or_else(|| vec![1.0]),
                };
                Ok((s.name.clone(), spec))
            })
            .collect()
    }
}

/// Parses `trees=N,circuits=M` (either part optional) onto `base`.
pub fn parse_caps(text: &str, base: Caps) -> Result<Caps> {
    let mut caps = base;
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("bad caps entry '{part}'")))?;
        let v: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad caps value '{v}'")))?;
        match k.trim() {
            "trees" => caps.max_trees = v,
            "circuits" => caps.max_circuits = v,
            other => {
                return Err(Error::Config(format!(
                    "unknown cap '{other}' (expected trees or circuits)"
                )))
            }
        }
    }
    Ok(caps)
}
