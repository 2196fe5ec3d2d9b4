//! `run_manifest.json`: what was run, on which inputs, producing which files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const FILE: &str = "run_manifest.json";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument vector, enough to replay the run.
    pub args: Vec<String>,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub version: &'static str,
    /// SHA-256 of every input file.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 of every file written, except the manifest itself.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(command: &str, out_dir: &Path) -> Self {
        RunManifest {
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            config: None,
            seed: None,
            out_dir: out_dir.to_path_buf(),
            version: env!("CARGO_PKG_VERSION"),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    pub fn output(&mut self, name: &str) -> Result<()> {
        let hash = sha256_file(&self.out_dir.join(name))?;
        self.outputs.insert(name.to_string(), hash);
        Ok(())
    }

    pub fn write(&self) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(self.out_dir.join(FILE), text + "\n")?;
        Ok(())
    }
}
