use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Record of one command run; `config` is embedded so the run can be replayed
/// with `--config manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub version: String,
    pub outputs: Vec<PathBuf>,
    pub runtime_secs: f64,
    pub config: ExperimentConfig,
}

/// Output directory that remembers every file written through it.
#[derive(Debug)]
pub struct OutputDir {
    root: Option<PathBuf>,
    written: Vec<PathBuf>,
    started: Instant,
}

impl OutputDir {
    /// `None` keeps results in memory only.
    pub fn new(root: Option<&Path>) -> Result<Self, CliError> {
        if let Some(r) = root {
            std::fs::create_dir_all(r)?;
        }
        Ok(Self {
            root: root.map(Path::to_path_buf),
            written: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    /// Writes `contents` to `name` under the root; a no-op without a root.
    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let Some(root) = &self.root else {
            return Ok(());
        };
        let path = root.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, contents)?;
        self.written.push(PathBuf::from(name));
        Ok(())
    }

    pub fn write_json<V: Serialize>(&mut self, name: &str, value: &V) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("value serializes");
        text.push('\n');
        self.write(name, &text)
    }

    /// Writes `manifest.json` and returns the manifest.
    pub fn finish(mut self, command: &str, config: &ExperimentConfig) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            command: command.to_string(),
            config_hash: config.hash(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.written.clone(),
            runtime_secs: self.started.elapsed().as_secs_f64(),
            config: config.clone(),
        };
        self.write_json("manifest.json", &manifest)?;
        Ok(manifest)
    }
}
