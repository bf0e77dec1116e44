use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use serde::Serialize;
use wignerlab::io::write_json;
use wignerlab::Grid;

/// Record of one run: what went in, what came out, on which lattice.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub grid: Grid,
    pub seed: u64,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, grid: Grid, seed: u64) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            grid,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn outputs(&mut self, paths: impl IntoIterator<Item = PathBuf>) {
        self.outputs.extend(paths);
    }

    /// Writes `<command>_manifest.json` into `dir` after checking that every
    /// listed output exists.
    pub fn finish(mut self, dir: &Path) -> Result<PathBuf> {
        for out in &self.outputs {
            if !out.exists() {
                bail!("output {} was not written", out.display());
            }
        }
        let path = dir.join(format!("{}_manifest.json", self.command));
        self.outputs.push(path.clone());
        write_json(&self, &path)?;
        Ok(path)
    }
}
