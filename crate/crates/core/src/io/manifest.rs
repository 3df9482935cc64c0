use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Config;
use crate::rng;

/// Provenance of one command invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical (pretty-printed) configuration JSON.
    pub config_digest: String,
    pub seed: Option<u64>,
    pub rng: String,
    pub version: String,
    pub started_unix: u64,
    pub wall_seconds: f64,
    /// Command-specific metadata.
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, config: &Config, seed: Option<u64>) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            config_digest: digest(config),
            seed,
            rng: rng::ALGORITHM.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            wall_seconds: 0.0,
            details: serde_json::Value::Null,
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> crate::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

pub fn digest(config: &Config) -> String {
    hex::encode(Sha256::digest(config.to_json().as_bytes()))
}

/// `<path>.manifest.json`.
pub fn sidecar_path(path: impl AsRef<Path>) -> PathBuf {
    let mut s = path.as_ref().as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::builtin;

    #[test]
    fn digest_is_stable_and_discriminating() {
        let a = digest(&builtin::braess());
        assert_eq!(a, digest(&builtin::braess()));
        assert_eq!(a.len(), 64);
        assert_ne!(a, digest(&builtin::pigou()));
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            sidecar_path("out/run.csv"),
            PathBuf::from("out/run.csv.manifest.json")
        );
    }
}
