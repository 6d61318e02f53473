//! Run manifests and all-or-nothing output staging.

use crate::error::CliError;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        Ok(FileDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

/// Everything needed to re-run a command: version, flags, seeds, and
/// digests of what went in and came out. No timestamps, so equal runs
/// give equal manifests.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub flags: serde_json::Value,
    pub jobs: Option<usize>,
    pub seeds: serde_json::Map<String, serde_json::Value>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new(command: &'static str, flags: &impl Serialize, jobs: Option<usize>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            flags: serde_json::to_value(flags).expect("flags serialize"),
            jobs,
            seeds: serde_json::Map::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn seed(mut self, name: &str, value: u64) -> Self {
        self.seeds.insert(name.to_string(), value.into());
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(FileDigest::of(path)?);
        Ok(())
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    sibling(out, "manifest.json")
}

/// `<out>.<suffix>` next to `out`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(suffix);
    out.with_file_name(name)
}

/// Collects outputs under temporary names and renames them into place
/// only when the whole command succeeds. Dropping an uncommitted set
/// deletes the temporaries.
#[derive(Default)]
pub struct StagedOutputs {
    staged: Vec<(PathBuf, PathBuf)>,
    committed: bool,
}

impl StagedOutputs {
    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        let tmp = sibling(path, "partial");
        std::fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
        self.staged.push((tmp, path.to_path_buf()));
        Ok(())
    }

    /// Commits every staged file plus a manifest naming them.
    pub fn commit(mut self, mut manifest: RunManifest, manifest_at: &Path) -> Result<(), CliError> {
        for (tmp, path) in &self.staged {
            let mut d = FileDigest::of(tmp)?;
            d.path = path.display().to_string();
            manifest.outputs.push(d);
        }
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        self.write(manifest_at, text.as_bytes())?;
        for (tmp, path) in &self.staged {
            std::fs::rename(tmp, path).map_err(|e| CliError::io(path, e))?;
        }
        self.committed = true;
        Ok(())
    }
}

impl Drop for StagedOutputs {
    fn drop(&mut self) {
        if !self.committed {
            for (tmp, _) in &self.staged {
                let _ = std::fs::remove_file(tmp);
            }
        }
    }
}
