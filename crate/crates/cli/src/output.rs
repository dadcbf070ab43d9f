use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("reports serialize");
    out.push(b'\n');
    out
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Everything needed to replay a run.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub version: String,
    pub config: Value,
    pub seeds: BTreeMap<String, u64>,
    /// sha256 of every input file, keyed by the path as given.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    /// Wall-clock fields; not part of the reproducible record.
    pub started_unix: u64,
    pub elapsed_seconds: f64,
}

/// Result of a subcommand before anything touches the disk.
pub struct Outcome {
    /// Content of the `--out` file.
    pub main: Vec<u8>,
    /// Extra files written next to it as `<stem>.<suffix>`.
    pub sidecars: Vec<(String, Vec<u8>)>,
    pub seeds: BTreeMap<String, u64>,
}

/// Path of the sidecar `suffix` for the primary output `out`.
pub fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    out.with_file_name(format!("{stem}.{suffix}"))
}
