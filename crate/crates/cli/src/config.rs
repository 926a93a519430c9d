//! The experiment config file: one JSON document with a section per experiment.

use std::path::Path;

use serde::{Deserialize, Serialize};

use repeater_ad::chain_model::ChainSpec;
use repeater_ad::chain_sim::{Parameter, Protocol};
use repeater_ad::optimize::{BrightStateConfig, SweepConfig};
use repeater_ad::placement::{square, PlacementConfig, Point};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<Protocol>,
    /// Sample count for `chain-sim` and `sensitivity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Extra derivatives reported by `chain-sim`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parameters: Vec<Parameter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<BrightStateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<PlacementSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<BenchmarkConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_compare: Option<SweepConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementSection {
    /// Explicit end nodes; otherwise the corners of a square with side `square`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_nodes: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub square: Option<f64>,
    /// One placement run per entry.
    #[serde(default = "default_n")]
    pub n_repeaters: Vec<usize>,
    #[serde(default)]
    pub settings: PlacementConfig,
}

fn default_n() -> Vec<usize> {
    vec![0]
}

impl PlacementSection {
    pub fn end_nodes(&self) -> Result<Vec<Point>, CliError> {
        match (&self.end_nodes, self.square) {
            (Some(e), None) => Ok(e.clone()),
            (None, Some(d)) if d > 0.0 && d.is_finite() => Ok(square(d)),
            (None, Some(d)) => Err(CliError::Config(format!("placement.square must be positive, got {d}"))),
            (Some(_), Some(_)) => Err(CliError::Config("placement: give either end_nodes or square, not both".into())),
            (None, None) => Err(CliError::Config("placement: missing field `end_nodes` (or `square`)".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub min_links: usize,
    pub max_links: usize,
    /// Bright-state values drawn per chain size.
    pub values: usize,
    /// Samples per value.
    pub samples: usize,
    pub link_length: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub attenuation_db_km: f64,
    #[serde(with = "repeater_ad::chain_model::maybe_inf")]
    pub coherence_time: f64,
    pub protocols: Vec<Protocol>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            min_links: 2,
            max_links: 25,
            values: 1000,
            samples: 1000,
            link_length: 65.0,
            alpha_min: 0.001,
            alpha_max: 0.101,
            attenuation_db_km: 0.2,
            coherence_time: 10.0,
            protocols: vec![Protocol::Single, Protocol::multi()],
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.min_links < 1 || self.max_links < 2 || self.min_links > self.max_links {
            return Err(CliError::Config(format!(
                "benchmark links must satisfy 1 <= min_links <= max_links, max_links >= 2 (got {}..{})",
                self.min_links, self.max_links
            )));
        }
        if self.values == 0 || self.samples < 2 {
            return Err(CliError::Config("benchmark needs values >= 1 and samples >= 2".into()));
        }
        if !(0.0 < self.alpha_min && self.alpha_min <= self.alpha_max && self.alpha_max < 1.0) {
            return Err(CliError::Config("benchmark alpha range must lie in (0, 1)".into()));
        }
        if self.protocols.is_empty() {
            return Err(CliError::Config("benchmark.protocols is empty".into()));
        }
        Ok(())
    }
}

/// Parses a config document; errors carry the line, column and serde's message
/// (which names missing or unknown fields).
pub fn parse(text: &str) -> Result<Config, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
}

pub fn load(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}
