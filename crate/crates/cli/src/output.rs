//! CSV, JSON and binary artifact writers.
//!
//! Numbers are written with 17 significant digits so every `f64` survives a
//! text round trip, and lines end in `\n` on every platform.

use std::fs;
use std::path::{Path, PathBuf};

use lbexp::assembly::HamiltonianMatrix;
use lbexp::region::Region;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Magic bytes opening a binary matrix dump.
pub const MATRIX_MAGIC: [u8; 8] = *b"LBEXPMAT";
pub const MATRIX_VERSION: u32 = 1;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Double-quotes a text field when it holds a delimiter.
pub fn text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// An in-memory CSV table.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    body: String,
    columns: usize,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut csv = Csv { body: String::new(), columns: header.len() };
        csv.push_line(header.iter().map(|h| h.as_ref().to_string()).collect());
        csv
    }

    pub fn row(&mut self, fields: Vec<String>) {
        assert_eq!(fields.len(), self.columns, "row width must match the header");
        self.push_line(fields);
    }

    fn push_line(&mut self, fields: Vec<String>) {
        self.body.push_str(&fields.join(","));
        self.body.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.body
    }
}

/// Collects written paths under one output directory.
#[derive(Debug)]
pub struct Sink {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Sink {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Sink { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, data).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, csv: &Csv) -> Result<(), CliError> {
        self.bytes(name, csv.as_str().as_bytes())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).expect("artifact metadata serializes");
        s.push('\n');
        self.bytes(name, s.as_bytes())
    }

    pub fn into_paths(self) -> Vec<PathBuf> {
        self.written
    }
}

/// SHA-256 of the region's canonical JSON form, hex encoded.
pub fn region_hash(region: &Region) -> String {
    let canonical = serde_json::to_vec(region).expect("regions serialize");
    Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
}

/// Binary dump: magic, version (u32), N (u64), V0 (f64), geometry tag
/// (16 bytes, NUL padded), then the matrix row-major; all little-endian.
pub fn matrix_binary(h: &HamiltonianMatrix) -> Vec<u8> {
    let n = h.dim();
    let mut out = Vec::with_capacity(44 + 8 * n * n);
    out.extend_from_slice(&MATRIX_MAGIC);
    out.extend_from_slice(&MATRIX_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&h.v0().to_le_bytes());
    let mut tag = [0u8; 16];
    let t = h.spec().geometry().tag().as_bytes();
    tag[..t.len()].copy_from_slice(t);
    out.extend_from_slice(&tag);
    for i in 0..n {
        for j in 0..n {
            out.extend_from_slice(&h.get(i, j).to_le_bytes());
        }
    }
    out
}

/// CSV dump: one matrix row per line, no header; metadata lives in the
/// spectrum sidecar.
pub fn matrix_csv(h: &HamiltonianMatrix) -> String {
    let n = h.dim();
    let mut s = String::new();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| num(h.get(i, j))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}
