use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IoError;

/// Provenance record written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub scenario: String,
    pub scenario_digest: String,
    pub mode: String,
    pub seed: u64,
    pub samples: usize,
    /// RFC 3339, UTC.
    pub timestamp: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        scenario: &str,
        scenario_digest: &str,
        mode: &str,
        seed: u64,
        samples: usize,
        outputs: Vec<String>,
    ) -> Self {
        Self {
            tool: "fso-harvest".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            scenario: scenario.into(),
            scenario_digest: scenario_digest.into(),
            mode: mode.into(),
            seed,
            samples,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs,
        }
    }

    /// `<output>.manifest.json` beside `output`.
    pub fn path_for(output: &Path) -> std::path::PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        name.into()
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        let json = serde_json::to_string_pretty(self).map_err(|e| IoError::Syntax(e.to_string()))?;
        std::fs::write(path, json + "\n").map_err(|source| IoError::File {
            path: path.display().to_string(),
            source,
        })
    }
}
