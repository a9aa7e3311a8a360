//! Append-only run manifests.
//!
//! Every command that writes data appends one JSON line to
//! `<out>/manifest.jsonl` listing the files it wrote with their SHA-256
//! digests. Timestamps live only here, never in data files.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wrcm_core::config::{SimulationConfig, SPEC_VERSION};
use wrcm_core::Result;

pub const MANIFEST_FILE: &str = "manifest.jsonl";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: Option<String>,
    pub spec_version: u32,
    pub command: String,
    pub started: u64,
    pub finished: u64,
    pub outputs: Vec<OutputFile>,
    /// Digest over the `(path, sha256)` list.
    pub digest: String,
    pub status: String,
    /// Resume key of a sweep point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Collects the outputs of one command before appending its manifest line.
pub struct Run {
    out: PathBuf,
    config_hash: Option<String>,
    command: String,
    started: u64,
    outputs: Vec<OutputFile>,
    key: Option<String>,
}

impl Run {
    pub fn start(out: &Path, config: Option<&SimulationConfig>, command: String) -> Result<Run> {
        fs::create_dir_all(out)?;
        Ok(Run {
            out: out.to_path_buf(),
            config_hash: config.map(|c| sha256_hex(c.to_toml().as_bytes())),
            command,
            started: unix_now(),
            outputs: Vec::new(),
            key: None,
        })
    }

    pub fn with_key(mut self, key: String) -> Self {
        self.key = Some(key);
        self
    }

    /// Write `bytes` to `<out>/<rel>` and record it.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.out.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, bytes)?;
        self.outputs.push(OutputFile {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn finish(self, status: &str) -> Result<RunManifest> {
        let listing: String = self
            .outputs
            .iter()
            .map(|o| format!("{}\0{}\n", o.path, o.sha256))
            .collect();
        let manifest = RunManifest {
            config_hash: self.config_hash,
            spec_version: SPEC_VERSION,
            command: self.command,
            started: self.started,
            finished: unix_now(),
            digest: sha256_hex(listing.as_bytes()),
            outputs: self.outputs,
            status: status.to_string(),
            key: self.key,
        };
        let mut line = serde_json::to_string(&manifest).expect("manifest serializes");
        line.push('\n');
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.out.join(MANIFEST_FILE))?
            .write_all(line.as_bytes())?;
        Ok(manifest)
    }
}

/// All manifest lines under `out`; unreadable lines are skipped.
pub fn read_manifests(out: &Path) -> Vec<RunManifest> {
    fs::read_to_string(out.join(MANIFEST_FILE))
        .map(|text| {
            text.lines()
                .filter_map(|l| serde_json::from_str(l).ok())
                .collect()
        })
        .unwrap_or_default()
}

/// The last successful manifest with `key` whose outputs are still on disk
/// unchanged.
pub fn completed(out: &Path, key: &str) -> Option<RunManifest> {
    read_manifests(out).into_iter().rev().find(|m| {
        m.status == "ok"
            && m.key.as_deref() == Some(key)
            && m.outputs
                .iter()
                .all(|o| fs::read(out.join(&o.path)).is_ok_and(|b| sha256_hex(&b) == o.sha256))
    })
}
