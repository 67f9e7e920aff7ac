//! Per-stage run records and their CSV form.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trace {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
    distances: Vec<f64>,
    metadata: Vec<(String, String)>,
}

impl Trace {
    /// `columns[1]` must be the distance column.
    pub fn new(columns: &[&str]) -> Self {
        Trace { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), distances: Vec::new(), metadata: Vec::new() }
    }

    pub fn add_metadata(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.push((key.to_string(), value.into()));
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn push(&mut self, cells: Vec<String>, distance: f64) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
        self.distances.push(distance);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Values of a named numeric column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r[idx].parse().ok()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Reads a trace written by [`Trace::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut header = None;
        for (_, line) in lines.by_ref() {
            if let Some(m) = line.strip_prefix('#') {
                let (k, v) = m.trim().split_once(':').unwrap_or((m.trim(), ""));
                metadata.push((k.trim().to_string(), v.trim().to_string()));
            } else {
                header = Some(line);
                break;
            }
        }
        let header = header.ok_or_else(|| invalid("trace has no header line"))?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        if columns.len() < 2 {
            return Err(invalid("trace needs at least a stage and a distance column"));
        }
        let mut trace = Trace { columns, rows: Vec::new(), distances: Vec::new(), metadata };
        for (no, line) in lines {
            let cells: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
            if cells.len() != trace.columns.len() {
                return Err(Error::Parse(format!("line {}: expected {} cells, found {}", no + 1, trace.columns.len(), cells.len())));
            }
            let d: f64 = cells[1]
                .parse()
                .map_err(|_| Error::Parse(format!("line {}, column 2: '{}' is not a number", no + 1, cells[1])))?;
            trace.distances.push(d);
            trace.rows.push(cells);
        }
        Ok(trace)
    }
}

/// Shortest round-trip decimal form.
pub fn fmt_f(x: f64) -> String {
    format!("{x}")
}

/// Vector cells are `;`-separated so the CSV stays flat.
pub fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f(*x)).collect::<Vec<_>>().join(";")
}

/// Git blob hash (`sha256("blob <len>\0" ‖ content)`) of the concatenated
/// inputs.
pub fn content_hash(parts: &[&[u8]]) -> String {
    let len: usize = parts.iter().map(|p| p.len()).sum();
    let mut h = Sha256::new();
    h.update(format!("blob {len}\0").as_bytes());
    for p in parts {
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
