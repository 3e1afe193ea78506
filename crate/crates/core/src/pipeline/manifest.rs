use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{io_error, PipelineError};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String, PipelineError> {
    let mut file = std::fs::File::open(path).map_err(|e| io_error(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf).map_err(|e| io_error(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCounts {
    pub n_participants: usize,
    pub n_fundus_features: usize,
    pub n_lipid_features: usize,
    pub n_tests_attempted: usize,
    pub n_tests: usize,
    pub n_skipped: usize,
    pub n_significant: usize,
}

/// Record of one analysis run. Paths appear by file name only so the
/// manifest does not depend on where the run happened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub config: serde_json::Value,
    pub covariates: Vec<String>,
    pub sex_encoding: String,
    pub counts: RunCounts,
    /// Seconds since the epoch from `SOURCE_DATE_EPOCH`; absent otherwise so reruns stay byte-identical.
    pub timestamp_unix: Option<u64>,
}

impl RunManifest {
    pub fn new(config: serde_json::Value, counts: RunCounts) -> Self {
        Self {
            tool: "oculolipid".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            config,
            covariates: vec!["age".into(), "sex".into()],
            sex_encoding: "male=0,female=1".into(),
            counts,
            timestamp_unix: std::env::var("SOURCE_DATE_EPOCH")
                .ok()
                .and_then(|s| s.trim().parse().ok()),
        }
    }

    fn file_key(path: &Path) -> String {
        path.file_name()
            .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
    }

    pub fn add_input(&mut self, path: &Path) -> Result<(), PipelineError> {
        self.inputs.insert(Self::file_key(path), sha256_file(path)?);
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) -> Result<(), PipelineError> {
        self.outputs.insert(Self::file_key(path), sha256_file(path)?);
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    pub fn write(&self, path: &Path) -> Result<(), PipelineError> {
        std::fs::write(path, self.to_json()).map_err(|e| io_error(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_string() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn inputs_keyed_by_file_name() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("fundus.csv");
        std::fs::write(&p, b"abc").unwrap();
        let mut m = RunManifest::new(serde_json::json!({"q": 0.05}), RunCounts::default());
        m.add_input(&p).unwrap();
        assert_eq!(m.inputs["fundus.csv"], sha256_hex(b"abc"));
        let out = dir.path().join("m.json");
        m.write(&out).unwrap();
        assert_eq!(RunManifest::read(&out).unwrap(), m);
    }
}
