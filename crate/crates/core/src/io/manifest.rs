use super::{ConfigFile, IoError};
use crate::experiments::SweepSpec;
use crate::params::ModelParams;
use crate::simulator::{Integrator, SimConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

/// Everything needed to reproduce a run. The embedded `config` is a valid
/// config document with every default resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub timestamp_unix: u64,
    pub seed: Option<u64>,
    pub integrator: Option<Integrator>,
    pub params: ModelParams,
    pub sim: Option<SimConfig>,
    pub sweep: Option<SweepSpec>,
    pub config: ConfigFile,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: ConfigFile) -> Self {
        let sim = config.sim.as_ref().map(|s| s.resolved(&config.model));
        let config = ConfigFile { sim: sim.clone(), ..config };
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            seed: sim.as_ref().map(|s| s.seed),
            integrator: sim
                .as_ref()
                .and_then(|s| Integrator::select(&config.model, s.scheme).ok()),
            params: config.model,
            sweep: config.sweep_spec(),
            sim,
            config,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n")
            .map_err(|source| IoError::Write { path: path.to_path_buf(), source })
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| IoError::Read { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|source| IoError::Parse { path: path.to_path_buf(), source })
    }
}
