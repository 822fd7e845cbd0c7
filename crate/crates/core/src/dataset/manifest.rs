use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::DatasetError;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

/// Paths and SHA-256 checksums of the files a dataset was built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub files: Vec<ManifestEntry>,
}

fn sha256_hex(path: &Path) -> Result<String, DatasetError> {
    let bytes = std::fs::read(path).map_err(|source| DatasetError::Io { path: path.display().to_string(), source })?;
    let digest = Sha256::digest(&bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        write!(out, "{b:02x}").unwrap();
    }
    Ok(out)
}

impl DatasetManifest {
    /// Hashes each `(role, path)` pair.
    pub fn build<'a>(files: impl IntoIterator<Item = (&'a str, &'a Path)>) -> Result<Self, DatasetError> {
        let files = files
            .into_iter()
            .map(|(role, path)| Ok(ManifestEntry { role: role.to_string(), path: path.to_path_buf(), sha256: sha256_hex(path)? }))
            .collect::<Result<_, DatasetError>>()?;
        Ok(Self { version: MANIFEST_VERSION, files })
    }

    /// Re-hashes every file and fails on the first mismatch.
    pub fn verify(&self) -> Result<(), DatasetError> {
        for entry in &self.files {
            let actual = sha256_hex(&entry.path)?;
            if actual != entry.sha256 {
                return Err(DatasetError::Manifest {
                    path: entry.path.display().to_string(),
                    reason: format!("checksum mismatch: manifest {} vs file {actual}", entry.sha256),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(path: &Path, text: &str) -> Result<Self, DatasetError> {
        let m: Self = serde_json::from_str(text)
            .map_err(|e| DatasetError::Manifest { path: path.display().to_string(), reason: e.to_string() })?;
        if m.version != MANIFEST_VERSION {
            return Err(DatasetError::Manifest {
                path: path.display().to_string(),
                reason: format!("unsupported manifest version {}", m.version),
            });
        }
        Ok(m)
    }
}
