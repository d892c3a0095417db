//! Experiment configuration files (JSON, schema version 1).
//!
//! ```json
//! {
//!   "v": 1,
//!   "source": {"sbm": {"n": 1000, "K": 4, "rho_a": 0.2, "r": 0.25}},
//!   "method": {"pace": {"T": 60, "sampler": {"scheme": "random_m", "m": 300, "m_star": 4}}},
//!   "base": {"name": "spectral_adj"},
//!   "seeds": [0, 1, 2, 3, 4]
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_path_to_error::Segment;

use pace_core::cluster::BaseSpec;
use pace_core::gale::GaleConfig;
use pace_core::pace::PaceConfig;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Planted-partition model `B = ρa((1 − r)I + rJ)` with block proportions `pi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbmSource {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    /// Balanced when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<f64>>,
    pub rho_a: f64,
    pub r: f64,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeListSource {
    pub path: PathBuf,
    /// Label file indexed by the ids used in the edge list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    #[serde(rename = "K")]
    pub k: usize,
    /// Restrict to the largest connected component.
    #[serde(default = "yes")]
    pub largest_component: bool,
    /// Drop degree-one nodes (after component extraction).
    #[serde(default)]
    pub drop_leaves: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    Sbm(SbmSource),
    EdgeList(EdgeListSource),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Method {
    /// The base clusterer on the whole graph.
    BaseOnly {},
    Pace(PaceConfig),
    Gale(GaleConfig),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::BaseOnly {} => "base_only",
            Method::Pace(_) => "pace",
            Method::Gale(_) => "gale",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub v: u32,
    pub source: Source,
    pub method: Method,
    pub base: BaseSpec,
    pub seeds: Vec<u64>,
    /// Worker threads; falls back to `PACE_WORKERS`, then to the core count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Report path; the report goes to stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for segment in path.iter() {
        match segment {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

impl ExperimentConfig {
    /// Parses and validates a config; errors carry the JSON pointer of the
    /// offending value.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let ptr = pointer(e.path());
            Error::config(ptr, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn k(&self) -> usize {
        match &self.source {
            Source::Sbm(s) => s.k,
            Source::EdgeList(e) => e.k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.v != SCHEMA_VERSION {
            return Err(Error::config("/v", format!("unsupported schema version {}, expected {SCHEMA_VERSION}", self.v)));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("/seeds", "at least one seed is required"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("/workers", "workers must be at least 1"));
        }
        let k = self.k();
        match &self.source {
            Source::Sbm(s) => {
                if k == 0 || s.n < k {
                    return Err(Error::config("/source/sbm/K", format!("K = {k} must lie in 1..=n")));
                }
                if let Some(pi) = &s.pi {
                    if pi.len() != k {
                        return Err(Error::config("/source/sbm/pi", format!("expected {k} proportions, found {}", pi.len())));
                    }
                }
                self.sbm_params().map_err(|e| Error::config("/source/sbm", e.to_string()))?;
            }
            Source::EdgeList(e) => {
                if e.k == 0 {
                    return Err(Error::config("/source/edge_list/K", "K must be at least 1"));
                }
            }
        }
        self.base.build().map_err(|e| Error::config("/base", e.to_string()))?;
        match &self.method {
            Method::BaseOnly {} => {}
            Method::Pace(p) => p.validate(k).map_err(|e| Error::config("/method/pace", e.to_string()))?,
            Method::Gale(g) => g.validate(k).map_err(|e| Error::config("/method/gale", e.to_string()))?,
        }
        Ok(())
    }

    pub(crate) fn sbm_params(&self) -> pace_core::Result<pace_core::SbmParams> {
        let Source::Sbm(s) = &self.source else {
            unreachable!("only called for simulated sources");
        };
        let pi = s.pi.clone().unwrap_or_else(|| pace_core::SbmParams::balanced(s.k));
        pace_core::graph::planted_partition_params(1.0, s.rho_a, s.r, pi)
    }
}
