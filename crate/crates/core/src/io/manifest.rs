use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;

/// Record written next to every set of outputs: the resolved config, the
/// command with its options and the library version, enough to re-run the
/// experiment without any other state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub library: String,
    pub version: String,
    pub command: String,
    /// Command-line options other than the config path and output directory.
    pub arguments: Vec<String>,
    pub deterministic: bool,
    pub seed: u64,
    pub config: ExperimentConfig,
    /// File names relative to the manifest.
    pub outputs: Vec<String>,
    pub exit_code: i32,
}

impl Manifest {
    pub fn new(command: &str, arguments: Vec<String>, deterministic: bool, config: ExperimentConfig) -> Self {
        Self {
            library: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            arguments,
            deterministic,
            seed: config.seed,
            config,
            outputs: Vec::new(),
            exit_code: 0,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}
