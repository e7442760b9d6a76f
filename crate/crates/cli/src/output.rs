//! Command results and where they are written.

use crate::error::CliError;
use serde_json::Value;
use std::path::{Path, PathBuf};

/// Directory against which relative output paths are resolved.
pub const OUT_DIR_VAR: &str = "CHAMBERFLOW_OUT_DIR";

/// A CSV table; every cell is already formatted.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Table {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Formats a float with the shortest representation that round-trips.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// What a command produced.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub json: Value,
    pub csv: Option<Table>,
    /// The mathematics answered no: exit status 2.
    pub refused: bool,
}

impl Outcome {
    pub fn ok(json: Value) -> Outcome {
        Outcome { json, csv: None, refused: false }
    }

    pub fn refused(json: Value) -> Outcome {
        Outcome { json, csv: None, refused: true }
    }

    pub fn with_csv(mut self, table: Table) -> Outcome {
        self.csv = Some(table);
        self
    }
}

pub fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let path = resolve(path);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}
