//! Run manifests: every CLI stage writes a JSON manifest recording the
//! resolved configuration, the root seed, and the artifacts it produced, so
//! any run can be reproduced from the manifest alone. Timestamps live only
//! here; primary artifacts stay byte-deterministic.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestOutput {
    pub path: PathBuf,
    /// Primary artifacts are byte-identical across reruns of the same
    /// manifest; auxiliary ones may carry wall-clock data.
    pub primary: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    pub seed: u64,
    /// Seconds since the Unix epoch at manifest creation.
    pub created_unix_secs: u64,
    /// The fully resolved configuration (defaults < config file < flags).
    pub config: serde_json::Value,
    pub outputs: Vec<ManifestOutput>,
}

impl RunManifest {
    pub fn new<C: Serialize>(subcommand: &str, seed: u64, config: &C) -> Result<RunManifest> {
        Ok(RunManifest {
            subcommand: subcommand.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            created_unix_secs: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config: serde_json::to_value(config)
                .map_err(|e| Error::Config(format!("cannot serialize config: {e}")))?,
            outputs: Vec::new(),
        })
    }

    pub fn push_output(&mut self, path: impl Into<PathBuf>, primary: bool) {
        self.outputs.push(ManifestOutput {
            path: path.into(),
            primary,
        });
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(MANIFEST_NAME);
        let mut body = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("cannot serialize manifest: {e}")))?;
        body.push('\n');
        fs::write(&path, body)?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let body = fs::read_to_string(path).map_err(|e| {
            Error::MissingArtifact(format!("cannot read manifest {}: {e}", path.display()))
        })?;
        serde_json::from_str(&body)
            .map_err(|e| Error::Config(format!("malformed manifest {}: {e}", path.display())))
    }
}

/// Error for a missing upstream artifact, naming the stage that produces it.
pub fn require_artifact(path: &Path, producing_stage: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingArtifact(format!(
            "{} not found; run the `{producing_stage}` stage first",
            path.display()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn manifest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new("bench", 42, &json!({"repeats": 3})).unwrap();
        m.push_output(dir.path().join("cells.csv"), true);
        m.push_output(dir.path().join("curves.csv"), false);
        let path = m.save(dir.path()).unwrap();
        let loaded = RunManifest::load(&path).unwrap();
        assert_eq!(loaded.subcommand, "bench");
        assert_eq!(loaded.seed, 42);
        assert_eq!(loaded.config["repeats"], 3);
        assert_eq!(loaded.outputs.len(), 2);
        assert!(loaded.outputs[0].primary);
        assert!(!loaded.outputs[1].primary);
    }

    #[test]
    fn missing_artifact_names_the_stage() {
        let err = require_artifact(Path::new("/nonexistent/corpus.txt"), "harvest").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("harvest"), "{msg}");
    }
}
