//! JSON configuration file.
//!
//! Three optional sections, `network`, `energy` and `algorithms`; every
//! missing field takes its default, so `{}` (or an empty file) is the
//! reference 100-node setup. Unknown fields are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::RadioConstants;
use crate::error::{Error, Result};
use crate::net::{NetworkConfig, Position};
use crate::sim::AlgorithmParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub field_width: f64,
    pub field_height: f64,
    pub base_station: Position,
    pub nodes_count: usize,
    pub packet_bits: u64,
    pub initial_energy: f64,
    pub cluster_fraction: f64,
    pub max_rounds: usize,
}

impl Default for NetworkSection {
    fn default() -> Self {
        let d = NetworkConfig::default();
        Self {
            field_width: d.field_width,
            field_height: d.field_height,
            base_station: d.base_station,
            nodes_count: d.nodes_count,
            packet_bits: d.packet_bits,
            initial_energy: d.initial_energy,
            cluster_fraction: d.cluster_fraction,
            max_rounds: d.max_rounds,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub network: NetworkSection,
    pub energy: RadioConstants,
    pub algorithms: AlgorithmParams,
}

impl SimConfig {
    /// Parses a config document. Structural errors name the offending field
    /// path; range checks are left to [`SimConfig::validate`].
    pub fn from_json_str(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(vec![format!("{path}: {}", e.into_inner())])
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn network_config(&self) -> NetworkConfig {
        let n = &self.network;
        NetworkConfig {
            field_width: n.field_width,
            field_height: n.field_height,
            base_station: n.base_station,
            nodes_count: n.nodes_count,
            packet_bits: n.packet_bits,
            initial_energy: n.initial_energy,
            radio: self.energy,
            cluster_fraction: n.cluster_fraction,
            max_rounds: n.max_rounds,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = self.network_config().violations();
        out.extend(self.algorithms.violations());
        out
    }

    /// Fails with every violated invariant at once.
    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
