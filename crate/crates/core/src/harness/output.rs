use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::linalg::CMatrix;

use super::HarnessError;

/// Scientific notation with 17 significant digits (lossless for `f64`).
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `{"re": [[..]], "im": [[..]]}`, row-major.
pub fn matrix_json(m: &CMatrix) -> serde_json::Value {
    let rows = |f: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
            .collect()
    };
    serde_json::json!({ "re": rows(|z| z.re), "im": rows(|z| z.im) })
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::io(path, e.into()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub(crate) struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        let io = |e: csv::Error| HarnessError::io(path, e.into());
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| HarnessError::io(path, e))
    }
}

/// Run manifest: everything needed to reproduce the data files.
pub(crate) fn write_manifest<C: Serialize>(dir: &Path, command: &str, config: &C, master_seed: u64) -> Result<(), HarnessError> {
    let manifest = serde_json::json!({
        "command": command,
        "master_seed": master_seed,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
    });
    write_json(&dir.join("manifest.json"), &manifest)
}
