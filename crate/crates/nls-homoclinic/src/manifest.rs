//! Run manifests: what was run, on which inputs, what came out, which oracles held.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::verify::OracleResult;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Command-line arguments after the program name.
    pub arguments: Vec<String>,
    pub config: Config,
    /// Hash of `(command, arguments, config)`.
    pub input_hash: String,
    pub outputs: Vec<OutputFile>,
    pub oracles: Vec<OracleResult>,
    pub summary: serde_json::Value,
}

impl RunManifest {
    /// `inputs` is a canonical rendering of the parsed options; the hash ignores
    /// `arguments` so that output location and thread count do not change it.
    pub fn new(command: &str, arguments: Vec<String>, inputs: &str, config: &Config) -> Self {
        let key = serde_json::to_string(&(command, inputs, config)).expect("config serialises");
        RunManifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            input_hash: sha256_hex(key.as_bytes()),
            arguments,
            config: config.clone(),
            outputs: vec![],
            oracles: vec![],
            summary: serde_json::Value::Null,
        }
    }

    pub fn passed(&self) -> bool {
        self.oracles.iter().all(|o| o.pass)
    }
}

/// Writes artifacts into one directory and records them.
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)
            .map_err(|e| Error::Config(format!("cannot create {}: {e}", root.display())))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&self, manifest: &mut RunManifest, name: &str, body: &str) -> Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, body)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
        manifest.outputs.push(OutputFile {
            path: name.into(),
            bytes: body.len(),
            sha256: sha256_hex(body.as_bytes()),
        });
        Ok(())
    }

    pub fn finish(&self, manifest: &RunManifest) -> Result<PathBuf> {
        let path = self
            .root
            .join(format!("{}.manifest.json", manifest.command));
        let body = serde_json::to_string_pretty(manifest).expect("manifest serialises");
        std::fs::write(&path, body)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn hash_depends_on_inputs() {
        let c = Config::default();
        let a = RunManifest::new("spectrum", vec![], "k_max: 6", &c);
        let b = RunManifest::new("spectrum", vec![], "k_max: 4", &c);
        assert_ne!(a.input_hash, b.input_hash);
        let moved = RunManifest::new("spectrum", vec!["--out".into(), "x".into()], "k_max: 6", &c);
        assert_eq!(a.input_hash, moved.input_hash);
        let other = Config {
            grid: crate::config::GridSpec { n: 128, k_max: 16 },
            ..c
        };
        assert_ne!(
            a.input_hash,
            RunManifest::new("spectrum", vec![], "k_max: 6", &other).input_hash
        );
    }
}
