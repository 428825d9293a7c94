//! The single writer through which every output file passes, so the
//! manifest always matches the directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// True when every declared file was written and no stage failed.
    pub complete: bool,
    pub exit_code: u8,
    pub declared: Vec<String>,
    pub files: Vec<FileEntry>,
    pub missing: Vec<String>,
    pub inputs: Vec<InputEntry>,
    pub errors: Vec<String>,
    pub config: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

pub struct Bundle {
    dir: PathBuf,
    command: String,
    declared: Vec<String>,
    files: Vec<FileEntry>,
    inputs: Vec<InputEntry>,
    errors: Vec<String>,
}

impl Bundle {
    /// Creates the output directory. `declared` names the files a complete
    /// run produces.
    pub fn create(dir: &Path, command: &str, declared: Vec<String>) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Bundle {
            dir: dir.to_path_buf(),
            command: command.into(),
            declared,
            files: Vec::new(),
            inputs: Vec::new(),
            errors: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        let sha256 = hash_file(path)?;
        let name = path.file_name().map_or_else(
            || path.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        );
        self.inputs.push(InputEntry { path: name, sha256 });
        Ok(())
    }

    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let bytes = bytes.as_ref();
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileEntry {
            name: name.into(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn error(&mut self, stage: &str, e: impl std::fmt::Display) {
        self.errors.push(format!("{stage}: {e}"));
    }

    pub fn has_errors(&self) -> bool {
        !self.errors.is_empty()
    }

    /// Writes the manifest and returns it.
    pub fn finish(self, exit_code: u8, config: serde_json::Value) -> Result<Manifest> {
        let missing: Vec<String> = self
            .declared
            .iter()
            .filter(|d| !self.files.iter().any(|f| &f.name == *d))
            .cloned()
            .collect();
        let mut files = self.files;
        files.sort_by(|a, b| a.name.cmp(&b.name));
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command,
            complete: missing.is_empty() && self.errors.is_empty(),
            exit_code,
            declared: self.declared,
            files,
            missing,
            inputs: self.inputs,
            errors: self.errors,
            config,
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Serialize(e.to_string()))?
            + "\n";
        let path = self.dir.join(MANIFEST);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Serialize(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_tracks_written_and_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut b =
            Bundle::create(dir.path(), "analyze", vec!["a.txt".into(), "b.txt".into()]).unwrap();
        b.write("a.txt", "hello").unwrap();
        b.write("a.txt", "hello").unwrap();
        let m = b.finish(3, serde_json::Value::Null).unwrap();
        assert!(!m.complete);
        assert_eq!(m.files.len(), 1);
        assert_eq!(m.missing, vec!["b.txt".to_string()]);
        assert_eq!(
            m.files[0].sha256,
            "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824"
        );
        assert_eq!(read_manifest(dir.path()).unwrap(), m);
    }
}
