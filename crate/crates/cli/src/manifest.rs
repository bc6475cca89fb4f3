use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::settings::Settings;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance block embedded in every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub flags: Settings,
    pub inputs: Vec<InputDigest>,
    pub version: &'static str,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub seed: u64,
}

impl RunManifest {
    pub fn new(command: &str, settings: &Settings, inputs: &[(&Path, &[u8])]) -> Self {
        Self {
            command: command.to_string(),
            flags: settings.clone(),
            inputs: inputs
                .iter()
                .map(|(p, bytes)| InputDigest {
                    path: p.display().to_string(),
                    sha256: hex::encode(Sha256::digest(bytes)),
                })
                .collect(),
            version: env!("CARGO_PKG_VERSION"),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            seed: settings.seed,
        }
    }

    pub fn tsv_line(&self) -> String {
        format!("# manifest: {}\n", serde_json::to_string(self).expect("manifest serializes"))
    }
}
