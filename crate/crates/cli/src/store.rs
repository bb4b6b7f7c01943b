//! On-disk stage outputs with content-addressed manifests.
//!
//! Every stage directory holds its files plus `manifest.json`, which records
//! the stage key (a SHA-256 over the stage parameters and upstream content)
//! and the SHA-256 of every file. A stage is reused only when its key matches
//! and every listed file still hashes to the recorded digest. The manifest is
//! written last, so a directory without one is never mistaken for a result.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{io_err, CliError, Result};

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Digest of the canonical JSON encoding of `value`.
pub fn key_of(value: &Value) -> String {
    sha256_hex(&serde_json::to_vec(value).expect("json values always serialize"))
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// A finished stage as read back from its manifest.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub dir: PathBuf,
    pub bytes: Vec<u8>,
    pub value: Value,
}

impl Manifest {
    pub fn read(dir: &Path) -> Option<Self> {
        let bytes = fs::read(dir.join(MANIFEST)).ok()?;
        let value = serde_json::from_slice(&bytes).ok()?;
        Some(Self { dir: dir.to_path_buf(), bytes, value })
    }

    /// The manifest of stage `needed`, or a staged-dependency error naming it.
    pub fn require(dir: &Path, needed: &'static str) -> Result<Self> {
        Self::read(dir).ok_or_else(|| CliError::MissingStage { needed, missing: dir.join(MANIFEST) })
    }

    pub fn key(&self) -> Option<&str> {
        self.value.get("key").and_then(Value::as_str)
    }

    pub fn digest(&self) -> String {
        sha256_hex(&self.bytes)
    }

    /// Relative file names and digests listed in the manifest.
    pub fn files(&self) -> BTreeMap<String, String> {
        self.value
            .get("files")
            .and_then(Value::as_object)
            .map(|m| m.iter().filter_map(|(k, v)| Some((k.clone(), v.as_str()?.to_string()))).collect())
            .unwrap_or_default()
    }

    /// True when every listed file exists with its recorded digest.
    pub fn verify(&self) -> bool {
        self.files().iter().all(|(rel, digest)| fs::read(self.dir.join(rel)).is_ok_and(|b| sha256_hex(&b) == *digest))
    }

    pub fn read_file(&self, rel: &str, stage: &'static str) -> Result<Vec<u8>> {
        let expected = self
            .files()
            .remove(rel)
            .ok_or_else(|| CliError::Corrupt { stage, message: format!("{rel} is not listed in the manifest") })?;
        let path = self.dir.join(rel);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        if sha256_hex(&bytes) != expected {
            return Err(CliError::Corrupt { stage, message: format!("{rel} changed since the stage ran") });
        }
        Ok(bytes)
    }
}

/// The manifest in `dir` if it was produced with `key` and is intact.
pub fn cached(dir: &Path, key: &str) -> Option<Manifest> {
    Manifest::read(dir).filter(|m| m.key() == Some(key) && m.verify())
}

/// Collects the files of one stage run.
pub struct StageWriter {
    stage: &'static str,
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

impl StageWriter {
    /// Clears `dir` so stale files of earlier runs cannot linger.
    pub fn begin(stage: &'static str, dir: &Path) -> Result<Self> {
        if dir.exists() {
            fs::remove_dir_all(dir).map_err(io_err(dir))?;
        }
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self { stage, dir: dir.to_path_buf(), files: BTreeMap::new() })
    }

    pub fn put(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(rel), bytes)?;
        self.files.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    /// Renders a file through a core writer, then stores it.
    pub fn put_with<F>(&mut self, rel: &str, render: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> commfolio_core::Result<()>,
    {
        let mut buf = Vec::new();
        render(&mut buf)?;
        self.put(rel, &buf)
    }

    pub fn put_json(&mut self, rel: &str, value: &Value) -> Result<()> {
        self.put(rel, &pretty(value))
    }

    /// Writes the manifest: `body` fields plus stage name, key and file digests.
    pub fn finish(self, key: &str, body: Value) -> Result<Manifest> {
        let mut value = json!({ "stage": self.stage, "key": key, "files": self.files });
        if let (Some(target), Value::Object(extra)) = (value.as_object_mut(), body) {
            target.extend(extra);
        }
        let bytes = pretty(&value);
        write_atomic(&self.dir.join(MANIFEST), &bytes)?;
        Ok(Manifest { dir: self.dir, bytes, value })
    }
}

fn pretty(value: &Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("json values always serialize");
    bytes.push(b'\n');
    bytes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("commfolio-store-{}-{name}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        dir
    }

    #[test]
    fn manifest_round_trip_and_cache_validation() {
        let dir = scratch("cache");
        let mut w = StageWriter::begin("demo", &dir).unwrap();
        w.put("a/x.csv", b"1,2\n").unwrap();
        let m = w.finish("k1", json!({ "n": 3 })).unwrap();
        assert_eq!(m.value["n"], 3);
        assert!(cached(&dir, "k1").is_some());
        assert!(cached(&dir, "k2").is_none());
        fs::write(dir.join("a/x.csv"), b"tampered").unwrap();
        assert!(cached(&dir, "k1").is_none());
        assert!(matches!(m.read_file("a/x.csv", "demo"), Err(CliError::Corrupt { .. })));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn begin_clears_previous_outputs() {
        let dir = scratch("clear");
        let mut w = StageWriter::begin("demo", &dir).unwrap();
        w.put("old.csv", b"x").unwrap();
        StageWriter::begin("demo", &dir).unwrap();
        assert!(!dir.join("old.csv").exists());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn missing_stage_names_the_stage() {
        let err = Manifest::require(&scratch("none"), "correlate").unwrap_err();
        assert_eq!(err.exit_code(), 4);
        assert!(err.to_string().contains("`correlate`"));
    }
}
