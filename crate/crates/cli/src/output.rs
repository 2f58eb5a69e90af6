//! CSV tables and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            // 17 significant digits
            Value::Float(x) => format!("{x:.16e}"),
            Value::Text(s) => s.clone(),
        }
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Int(v as i64)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

/// A rectangular table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Panics if the row width differs from the header.
    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Writes `table` as comma-separated text with a header row.
pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    let wrap = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(&table.columns).map_err(wrap)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Value::render)).map_err(wrap)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub phase: String,
    pub seconds: f64,
}

/// Everything needed to rerun a subcommand: the command line, the exact
/// config text and the hashes of what it produced.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub args: Vec<String>,
    pub config_path: Option<String>,
    pub config_sha256: Option<String>,
    pub config_text: Option<String>,
    pub threads: usize,
    pub exit_code: i32,
    pub timings: Vec<Timing>,
    pub outputs: Vec<OutputFile>,
}

impl Manifest {
    pub fn new(subcommand: &str, args: Vec<String>) -> Self {
        Self {
            tool: "richards-dd".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            args,
            config_path: None,
            config_sha256: None,
            config_text: None,
            threads: rayon::current_num_threads(),
            exit_code: 0,
            timings: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn set_config(&mut self, path: &Path, text: &str) {
        self.config_path = Some(path.display().to_string());
        self.config_sha256 = Some(sha256_hex(text.as_bytes()));
        self.config_text = Some(text.to_string());
    }

    pub fn time(&mut self, phase: &str, seconds: f64) {
        self.timings.push(Timing { phase: phase.to_string(), seconds });
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Output directory that records each file it writes.
pub struct OutDir {
    dir: PathBuf,
    written: Vec<OutputFile>,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<()> {
        let path = self.dir.join(name);
        emit_csv(table, &path)?;
        let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        self.written.push(OutputFile { name: name.to_string(), sha256: sha256_hex(&bytes) });
        Ok(())
    }

    pub fn into_outputs(self) -> Vec<OutputFile> {
        self.written
    }
}
