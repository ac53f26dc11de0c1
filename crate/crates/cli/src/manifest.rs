//! Run manifests: digests of everything a stage read and wrote.
//!
//! Identical inputs and configs give identical digests and byte-identical
//! outputs; the timestamp is the only field that varies between reruns.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub timestamp: String,
    /// path -> sha256, for every input file read.
    pub inputs: BTreeMap<String, String>,
    /// path -> sha256, for every config file read.
    pub configs: BTreeMap<String, String>,
    /// path -> sha256, for every artifact written.
    pub outputs: BTreeMap<String, String>,
    pub stage_outcomes: Vec<StageOutcome>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageOutcome {
    pub stage: String,
    pub status: String,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let mut file = std::fs::File::open(path)
        .map_err(|e| CliError::io(path, format!("cannot hash: {e}")))?;
    let mut hasher = Sha256::new();
    let mut buffer = [0u8; 64 * 1024];
    loop {
        let n = file
            .read(&mut buffer)
            .map_err(|e| CliError::io(path, e.to_string()))?;
        if n == 0 {
            break;
        }
        hasher.update(&buffer[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            tool: "crashbench".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            inputs: BTreeMap::new(),
            configs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            stage_outcomes: Vec::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs
            .insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    pub fn record_config(&mut self, path: &Path) -> Result<(), CliError> {
        self.configs
            .insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    /// Outputs are keyed by file name: they all sit beside the manifest, and
    /// name-relative keys keep manifests comparable across output
    /// directories.
    pub fn record_output(&mut self, path: &Path) -> Result<(), CliError> {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().to_string())
            .unwrap_or_else(|| path.display().to_string());
        self.outputs.insert(name, sha256_file(path)?);
        Ok(())
    }

    pub fn stage(&mut self, stage: &str, status: &str) {
        self.stage_outcomes.push(StageOutcome {
            stage: stage.to_string(),
            status: status.to_string(),
        });
    }

    /// Writes `manifest_<subcommand>.json` beside the outputs.
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf, CliError> {
        let path = out_dir.join(format!("manifest_{}.json", self.subcommand));
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::io(&path, e.to_string()))?;
        std::fs::write(&path, json + "\n")
            .map_err(|e| CliError::io(&path, e.to_string()))?;
        Ok(path)
    }
}
