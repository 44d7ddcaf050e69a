//! Writing result files and their digest manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// One output file, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn text(name: impl Into<String>, text: impl Into<String>) -> Self {
        Artifact {
            name: name.into(),
            bytes: text.into().into_bytes(),
        }
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("artifact serializes");
        bytes.push(b'\n');
        Artifact {
            name: name.into(),
            bytes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn get(&self, name: &str) -> Option<&ManifestEntry> {
        self.files.iter().find(|e| e.name == name)
    }
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// Writes every artifact under `dir` and then `manifest.json`, which lists
/// the files in name order with their SHA-256 digests.
pub fn export_artifacts(artifacts: &[Artifact], dir: &Path) -> Result<Manifest, CliError> {
    let mut files = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let path = dir.join(&a.name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
        }
        fs::write(&path, &a.bytes).map_err(|e| io_error(&path, e))?;
        files.push(ManifestEntry {
            name: a.name.clone(),
            bytes: a.bytes.len(),
            sha256: hex::encode(Sha256::digest(&a.bytes)),
        });
    }
    files.sort_by(|a, b| a.name.cmp(&b.name));
    let manifest = Manifest { files };
    let out = Artifact::json(MANIFEST_NAME, &manifest);
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, &out.bytes).map_err(|e| io_error(&path, e))?;
    Ok(manifest)
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from(path),
        source,
    }
}
