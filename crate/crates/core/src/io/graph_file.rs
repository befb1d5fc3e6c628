use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeSpec, GraphSpec, Level, RateSource};
use crate::models::Bath;

pub const GRAPH_SCHEMA: u32 = 1;

/// On-disk graph description. Vertices are numbered from 1 in file order;
/// `rate_up` is the absorption rate (lower to higher level).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub levels: Vec<LevelEntry>,
    pub baths: Vec<Bath>,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelEntry {
    pub energy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub i: usize,
    pub j: usize,
    pub bath: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_up: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_down: Option<f64>,
}

impl GraphFile {
    pub fn from_spec(spec: &GraphSpec, name: Option<String>) -> GraphFile {
        let edges = spec
            .edges
            .iter()
            .map(|e| {
                let (amplitude, rate_up, rate_down) = match e.rates {
                    RateSource::Amplitude(a) => (Some(a), None, None),
                    RateSource::Explicit { up, down } => (None, Some(up), Some(down)),
                };
                EdgeEntry {
                    i: e.i + 1,
                    j: e.j + 1,
                    bath: spec.baths[e.bath].label.clone(),
                    amplitude,
                    rate_up,
                    rate_down,
                }
            })
            .collect();
        GraphFile {
            schema: GRAPH_SCHEMA,
            name,
            levels: spec
                .levels
                .iter()
                .map(|l| LevelEntry {
                    energy: l.energy,
                    label: l.label.clone(),
                })
                .collect(),
            baths: spec.baths.clone(),
            edges,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("graph files serialize")
    }

    /// Converts to a 0-based [`GraphSpec`]; field errors name the entry.
    pub fn to_spec(&self, path: &str) -> Result<GraphSpec> {
        let err = |message: String| Error::Parse {
            path: path.to_string(),
            message,
        };
        if self.schema != GRAPH_SCHEMA {
            return Err(err(format!(
                "schema: unsupported version {} (expected {GRAPH_SCHEMA})",
                self.schema
            )));
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for (k, e) in self.edges.iter().enumerate() {
            let bath = self
                .baths
                .iter()
                .position(|b| b.label == e.bath)
                .ok_or_else(|| err(format!("edges[{k}].bath: unknown bath '{}'", e.bath)))?;
            if e.i == 0 || e.j == 0 {
                return Err(err(format!("edges[{k}]: vertices are numbered from 1")));
            }
            let rates = match (e.amplitude, e.rate_up, e.rate_down) {
                (Some(a), None, None) => RateSource::Amplitude(a),
                (None, Some(up), Some(down)) => RateSource::Explicit { up, down },
                (None, None, None) => RateSource::Amplitude(1.0),
                _ => {
                    return Err(err(format!(
                        "edges[{k}]: give either `amplitude` or both `rate_up` and `rate_down`"
                    )))
                }
            };
            edges.push(EdgeSpec {
                i: e.i - 1,
                j: e.j - 1,
                bath,
                rates,
            });
        }
        Ok(GraphSpec {
            levels: self
                .levels
                .iter()
                .map(|l| Level {
                    energy: l.energy,
                    label: l.label.clone(),
                })
                .collect(),
            baths: self.baths.clone(),
            edges,
        })
    }
}

pub fn parse_graph_file(text: &str, path: &str) -> Result<GraphSpec> {
    let file: GraphFile = toml::from_str(text).map_err(|e| Error::Parse {
        path: path.to_string(),
        message: e.to_string(),
    })?;
    file.to_spec(path)
}

pub fn read_graph_file(path: &Path) -> Result<GraphSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_graph_file(&text, &path.display().to_string())
}
