use super::IoError;
use crate::experiments::{SweepAxis, SweepMode, SweepSpec};
use crate::params::ModelParams;
use crate::simulator::SimConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axes: Vec<SweepAxis>,
    #[serde(default)]
    pub mode: SweepMode,
}

/// Top-level config document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: ModelParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|source| {
            if source.kind() == std::io::ErrorKind::NotFound {
                IoError::NotFound(path.to_path_buf())
            } else {
                IoError::Read { path: path.to_path_buf(), source }
            }
        })?;
        Self::from_json(&text).map_err(|source| IoError::Parse { path: path.to_path_buf(), source })
    }

    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|source| IoError::Write { path: path.to_path_buf(), source })
    }

    pub fn sweep_spec(&self) -> Option<SweepSpec> {
        self.sweep.as_ref().map(|s| SweepSpec {
            base: self.model,
            axes: s.axes.clone(),
            mode: s.mode,
            sim: self.sim.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::SweptParam;

    const SAMPLE: &str = r#"{
        "model": {
            "mu": 0.05, "sigma_f": [0.2, 0.0], "sigma_n": [0.0, 0.3], "big_z": 0.5,
            "alpha_f": 1.0, "alpha_c": 1.0, "p_f": 0.5, "p_c": 0.5,
            "beta": 1.0, "k": 0.5, "tau": "infinite"
        },
        "sim": {"dt": 0.001, "horizon_t": 2000, "burn_in_t": 100, "n_paths": 32, "seed": 1},
        "sweep": {"axes": [{"param": "p_f", "min": 0.1, "max": 0.9, "n_points": 9}]}
    }"#;

    #[test]
    fn parses_all_sections() {
        let c = ConfigFile::from_json(SAMPLE).unwrap();
        assert_eq!(c.model, ModelParams::reference());
        let sim = c.sim.as_ref().unwrap();
        assert_eq!((sim.n_paths, sim.burn_in_t), (32, Some(100.0)));
        let spec = c.sweep_spec().unwrap();
        assert_eq!(spec.axes[0].param, SweptParam::PF);
        assert_eq!(spec.mode, SweepMode::Analytic);
    }

    #[test]
    fn unknown_section_or_key_is_an_error() {
        let typo = SAMPLE.replace("\"beta\"", "\"betta\"");
        assert!(ConfigFile::from_json(&typo).is_err());
        let extra = SAMPLE.replacen('{', "{\"plot\": {},", 1);
        assert!(ConfigFile::from_json(&extra).is_err());
        let bad_axis = SAMPLE.replace("\"p_f\", \"min\"", "\"q_f\", \"min\"");
        assert!(ConfigFile::from_json(&bad_axis).is_err());
    }

    #[test]
    fn round_trips_through_text() {
        let c = ConfigFile::from_json(SAMPLE).unwrap();
        assert_eq!(ConfigFile::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn missing_file_is_reported() {
        let err = ConfigFile::load(Path::new("/nonexistent/ham.json")).unwrap_err();
        assert!(matches!(err, IoError::NotFound(_)));
    }
}
