//! Run configuration: a flat TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use oculolipid::morphometry::MorphometryConfig;
use oculolipid::pipeline::AnalysisConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {message}", .path.display())]
    Read { path: PathBuf, message: String },
    #[error("config: {0}")]
    Parse(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config: {0}")]
    Invalid(String),
}

/// Every setting of a run. Keys are flat; the analysis and morphometry
/// settings sit at the top level next to the paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub masks_dir: Option<PathBuf>,
    pub fundus_csv: Option<PathBuf>,
    pub lipid_csv: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Apply log10 to lipid values on load; non-positive values become missing.
    pub lipid_log10: bool,
    pub seed: u64,
    pub jobs: Option<usize>,
    /// TOML or JSON file holding a planted-effect spec; the built-in spec otherwise.
    pub simulate_spec: Option<PathBuf>,
    pub simulate_n: Option<usize>,
    /// Bubble-plot axes; chosen from the results when empty.
    pub bubble_fundus: Vec<String>,
    pub bubble_lipids: Vec<String>,
    pub bubble_n_fundus: usize,
    pub bubble_n_lipids: usize,
    /// Demographic panels to draw; every feature when empty.
    pub panel_features: Vec<String>,
    pub age_density: bool,
    #[serde(flatten)]
    pub analysis: AnalysisConfig,
    #[serde(flatten)]
    pub morphometry: MorphometryConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            masks_dir: None,
            fundus_csv: None,
            lipid_csv: None,
            out_dir: PathBuf::from("out"),
            lipid_log10: false,
            seed: 7068,
            jobs: None,
            simulate_spec: None,
            simulate_n: None,
            bubble_fundus: Vec::new(),
            bubble_lipids: Vec::new(),
            bubble_n_fundus: 10,
            bubble_n_lipids: 30,
            panel_features: Vec::new(),
            age_density: false,
            analysis: AnalysisConfig::default(),
            morphometry: MorphometryConfig::default(),
        }
    }
}

const PATH_KEYS: [&str; 5] = ["masks_dir", "fundus_csv", "lipid_csv", "out_dir", "simulate_spec"];

fn known_keys() -> Vec<String> {
    let value = serde_json::to_value(RunConfig::default()).expect("serializable");
    value.as_object().expect("struct").keys().cloned().collect()
}

/// Parses a `KEY=VALUE` override. The value is read as a TOML literal when
/// possible and as a bare string otherwise.
pub fn parse_override(s: &str) -> Result<(String, toml::Value), ConfigError> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| ConfigError::Parse(format!("override `{s}` is not KEY=VALUE")))?;
    let key = key.trim().to_string();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((key, value))
}

impl RunConfig {
    /// Reads `path` (if any), applies `overrides` on top and validates.
    /// Relative paths in the file are taken relative to the file's directory.
    pub fn load(path: Option<&Path>, overrides: &[(String, toml::Value)]) -> Result<Self, ConfigError> {
        let mut table = toml::Table::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
            table = text
                .parse::<toml::Table>()
                .map_err(|e| ConfigError::Parse(e.to_string()))?;
            let base = path.parent().unwrap_or(Path::new(""));
            for key in PATH_KEYS {
                if let Some(toml::Value::String(s)) = table.get_mut(key) {
                    if Path::new(s.as_str()).is_relative() {
                        *s = base.join(s.as_str()).to_string_lossy().into_owned();
                    }
                }
            }
        }
        for (k, v) in overrides {
            table.insert(k.clone(), v.clone());
        }
        let known = known_keys();
        if let Some(k) = table.keys().find(|k| !known.contains(k)) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        let config: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let a = &self.analysis;
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::Invalid(msg.to_string()))
            }
        };
        check(a.q > 0.0 && a.q < 1.0, "q must lie in (0, 1)")?;
        check(a.ci_level > 0.0 && a.ci_level < 1.0, "ci_level must lie in (0, 1)")?;
        check((0.0..1.0).contains(&a.r_min), "r_min must lie in [0, 1)")?;
        check((0.0..=1.0).contains(&a.cluster_cut), "cluster_cut must lie in [0, 1]")?;
        check(self.jobs != Some(0), "jobs must be positive")?;
        check(self.simulate_n != Some(0), "simulate_n must be positive")?;
        Ok(())
    }

    /// Settings that determine the results, with paths reduced to file names
    /// so the snapshot does not depend on where the run happened.
    pub fn snapshot(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("serializable");
        let obj = v.as_object_mut().expect("struct");
        obj.remove("out_dir");
        obj.remove("jobs");
        for key in PATH_KEYS {
            if let Some(serde_json::Value::String(s)) = obj.get(key) {
                let name = Path::new(s).file_name().map(|n| n.to_string_lossy().into_owned());
                obj.insert(
                    key.into(),
                    name.map_or(serde_json::Value::Null, serde_json::Value::String),
                );
            }
        }
        v
    }
}
