use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, FORMAT_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

impl InputHash {
    pub fn new(path: &Path, sha256: String) -> Self {
        Self { path: path.display().to_string(), sha256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub toolkit_version: String,
    pub command: String,
    pub inputs: Vec<InputHash>,
    /// The configuration as interpreted, with paths resolved.
    pub config: RunConfig,
    pub seed: Option<u64>,
}

/// A per-file failure that did not stop the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileError {
    pub path: String,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub format_version: u32,
    pub provenance: Provenance,
    pub results: T,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default)]
    pub errors: Vec<FileError>,
}

impl<T> Report<T> {
    pub fn new(command: &str, config: &RunConfig, seed: Option<u64>, inputs: Vec<InputHash>, results: T) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            provenance: Provenance {
                toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
                inputs,
                config: config.clone(),
                seed,
            },
            results,
            warnings: Vec::new(),
            errors: Vec::new(),
        }
    }
}
