use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ConfigDoc;
use crate::CliError;

pub const MANIFEST_NAME: &str = "manifest.toml";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// Relative to the output directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

impl OutputEntry {
    pub fn of(path: &str, data: &[u8]) -> Self {
        Self {
            path: path.to_string(),
            bytes: data.len() as u64,
            sha256: hex::encode(Sha256::digest(data)),
        }
    }
}

/// Written next to the outputs of every run. Passing it back through
/// `--config` replays the run from `resolved`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: String,
    pub tool_version: String,
    pub exit_code: i32,
    pub wall_clock_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub outputs: Vec<OutputEntry>,
    pub resolved: ConfigDoc,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text = toml::to_string(self).map_err(|e| CliError::Io(format!("manifest: {e}")))?;
        fs::write(dir.join(MANIFEST_NAME), text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| CliError::config(e.to_string()))
    }
}
