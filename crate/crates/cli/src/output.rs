//! Artifact emission: CSV tables with a fixed header row and LF line
//! endings, plus a run manifest listing the resolved configuration and a
//! SHA-256 checksum for every file. No timestamps anywhere, so identical
//! configurations produce byte-identical output trees.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// Floats are written in scientific notation with 17 significant digits,
/// enough to round-trip every f64 bit pattern.
pub fn float_cell(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub content: String,
}

impl Artifact {
    pub fn new(name: &str, content: String) -> Self {
        Self {
            name: name.to_string(),
            content,
        }
    }
}

/// Builds a CSV body from a header and rows of preformatted cells.
pub fn csv_table(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a ExperimentConfig,
    seed: u64,
    artifacts: Vec<ManifestEntry>,
}

/// Writes every artifact plus `manifest.json` into `dir`, creating it if
/// needed.
pub fn write_run(dir: &Path, config: &ExperimentConfig, artifacts: &[Artifact]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut entries: Vec<ManifestEntry> = artifacts
        .iter()
        .map(|a| ManifestEntry {
            file: a.name.clone(),
            bytes: a.content.len(),
            sha256: sha256_hex(a.content.as_bytes()),
        })
        .collect();
    entries.sort_by(|a, b| a.file.cmp(&b.file));
    for artifact in artifacts {
        fs::write(dir.join(&artifact.name), &artifact.content)?;
    }
    let manifest = Manifest {
        config,
        seed: config.seed,
        artifacts: entries,
    };
    let mut body = serde_json::to_string_pretty(&manifest)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    body.push('\n');
    fs::write(dir.join("manifest.json"), body)
}
