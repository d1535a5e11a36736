//! Run manifests: what a stage read, what it wrote, and with which settings.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use tempo_core::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub stage: String,
    pub config: Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub started_unix: u64,
    pub wall_clock_secs: f64,
    pub versions: Versions,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Versions {
    pub tempo: String,
}

impl Default for Versions {
    fn default() -> Self {
        Versions { tempo: env!("CARGO_PKG_VERSION").to_string() }
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

pub fn digest_all(paths: &[PathBuf]) -> Result<Vec<FileDigest>> {
    paths.iter().map(|p| Ok(FileDigest { path: p.clone(), sha256: sha256_file(p)? })).collect()
}

/// Manifest location for a stage whose primary output is `output`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Fail with `DependencyMissing` unless every input exists.
pub fn require(stage: &str, paths: &[PathBuf]) -> Result<()> {
    match paths.iter().find(|p| !p.exists()) {
        Some(p) => Err(Error::DependencyMissing { stage: stage.to_string(), path: p.clone() }),
        None => Ok(()),
    }
}

impl RunManifest {
    pub fn load(path: &Path) -> Option<RunManifest> {
        let text = fs::read_to_string(path).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    /// True when the recorded run used the same stage, settings and input
    /// bytes, and every recorded output is still present unchanged.
    pub fn is_current(&self, stage: &str, config: &Value, inputs: &[PathBuf]) -> bool {
        if self.stage != stage || &self.config != config || self.inputs.len() != inputs.len() {
            return false;
        }
        let same_inputs = self.inputs.iter().zip(inputs).all(|(d, p)| {
            d.path == *p && sha256_file(p).map(|h| h == d.sha256).unwrap_or(false)
        });
        same_inputs && self.outputs.iter().all(|d| sha256_file(&d.path).map(|h| h == d.sha256).unwrap_or(false))
    }
}
