use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Floats are written with 17 significant digits; non-finite values and
/// missing cells become empty fields.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A CSV file held in memory until the run finishes.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().context("flushing csv buffer")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: PathBuf,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config: serde_json::Value,
    pub version: &'static str,
    pub duration_ms: u128,
    pub points: usize,
    pub failed_points: usize,
    pub files: Vec<FileEntry>,
}

/// Writes every table under `dir`, returning entries in table order.
pub fn write_tables(dir: &Path, tables: &[Table]) -> Result<Vec<FileEntry>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut out = Vec::with_capacity(tables.len());
    for t in tables {
        let bytes = t.to_bytes()?;
        let rel = PathBuf::from(format!("{}.csv", t.name));
        let path = dir.join(&rel);
        std::fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
        out.push(FileEntry {
            path: rel,
            rows: t.rows.len(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
    }
    Ok(out)
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<PathBuf> {
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest)?;
    std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
