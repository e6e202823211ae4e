//! CSV files, file digests and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::functionals::DiagnosticsRecord;

pub const CSV_VERSION_LINE: &str = "# lognls-csv v1";

pub const DIAGNOSTICS_HEADER: &str = "t,mass,energy,h0,h1,h2,h3,h4,h5,hdot1,hdot2,hdot3,hdot4,hdot5,min_abs_u,min_abs_V,odd_defect";

/// A versioned CSV table. Numbers use the shortest round-trip form, so the
/// bytes depend only on the values.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn diagnostics(records: &[DiagnosticsRecord]) -> Self {
        let columns: Vec<&str> = DIAGNOSTICS_HEADER.split(',').collect();
        let mut table = Table::new(&columns);
        for r in records {
            let mut row = vec![r.t, r.mass, r.energy];
            row.extend_from_slice(&r.hfull);
            row.extend_from_slice(&r.hdot[1..]);
            row.extend([r.min_abs_u, r.min_abs_v, r.odd_defect]);
            table.push(row);
        }
        table
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_VERSION_LINE);
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (_, header) = lines.next().ok_or_else(|| Error::Config {
            line: 0,
            msg: "empty CSV".into(),
        })?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        let mut rows = vec![];
        for (i, line) in lines {
            let row = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Config {
                    line: i + 1,
                    msg: e.to_string(),
                })?;
            if row.len() != columns.len() {
                return Err(Error::Config {
                    line: i + 1,
                    msg: format!("expected {} fields, found {}", columns.len(), row.len()),
                });
            }
            rows.push(row);
        }
        Ok(Table { columns, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::InvalidParameter(format!("missing column '{name}'")))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the manifest directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Assertion {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub params: BTreeMap<String, String>,
    pub overrides: Vec<String>,
    pub version: String,
    pub wall_clock_seconds: f64,
    pub files: Vec<OutputFile>,
    pub assertions: Vec<Assertion>,
    /// Set when the run stopped on a numerical failure; outputs are partial.
    pub aborted: Option<String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.aborted.is_none() && self.assertions.iter().all(|a| a.passed)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_NAME);
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Numerical(format!("manifest serialization: {e}")))?;
        fs::write(&path, json + "\n")?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config {
            line: e.line(),
            msg: format!("{}: {e}", path.display()),
        })
    }
}

/// Collects the files a scenario writes into one directory.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            files: vec![],
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.files.push(OutputFile {
            path: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> Result<()> {
        self.write(name, &table.to_csv())
    }

    pub fn into_files(self) -> Vec<OutputFile> {
        self.files
    }
}
