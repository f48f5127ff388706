//! Headerless CSV vectors: one value per line, or comma separated.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::DenseVector;

pub fn read_vector_csv(path: impl AsRef<Path>) -> Result<DenseVector> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    for (no, line) in text.lines().enumerate() {
        for tok in line.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: no + 1,
                message: format!("invalid number '{tok}'"),
            })?;
            values.push(v);
        }
    }
    DenseVector::new(values)
}

/// One value per line, shortest round-trip formatting.
pub fn write_vector_csv(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(v.len() * 24);
    for x in v {
        writeln!(out, "{x:e}").expect("write to Vec");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
