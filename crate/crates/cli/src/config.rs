//! Run configuration: one JSON document holding every numeric parameter.
//! Command-line flags override the values it contains.

use std::collections::BTreeMap;
use std::path::Path;

use doobkit::experiments::{default_config, ExperimentConfig, EXPERIMENTS};
use doobkit::simkit::SimConfig;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Catalogue model for `simulate` / `verify` / `htransform`.
    pub model: Option<String>,
    /// Model parameters as exact rationals in text form.
    pub params: BTreeMap<String, String>,
    pub sim: SimConfig,
    pub experiments: BTreeMap<String, ExperimentConfig>,
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: None,
            params: BTreeMap::new(),
            sim: SimConfig::default(),
            experiments: EXPERIMENTS
                .iter()
                .map(|n| (n.to_string(), default_config(n).expect("registered")))
                .collect(),
            output: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn experiment(&self, name: &str) -> Result<ExperimentConfig, String> {
        match self.experiments.get(name) {
            Some(c) => Ok(c.clone()),
            None => default_config(name).map_err(|e| e.to_string()),
        }
    }
}
