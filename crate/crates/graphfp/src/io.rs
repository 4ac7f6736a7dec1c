//! Artifact files: CSV tables with fixed column schemas, JSON reports, and
//! the validation pass that runs before an experiment reports success.
//! Formatting is deterministic so identical runs produce identical bytes.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::{Error, Result};

/// Cell type of one CSV column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    /// Finite f64, shortest round-trip formatting.
    Float,
    /// Nonnegative integer.
    Integer,
    /// Free-form token (no commas).
    Text,
}

/// Column layout of one artifact kind.
#[derive(Debug, Clone)]
pub struct Schema {
    pub columns: Vec<(String, ColumnKind)>,
}

impl Schema {
    pub fn new(columns: Vec<(&str, ColumnKind)>) -> Self {
        Schema {
            columns: columns
                .into_iter()
                .map(|(n, k)| (n.to_string(), k))
                .collect(),
        }
    }

    /// Point-cloud prefix (`x0[,x1,...]`) followed by extra columns.
    pub fn points(dim: usize, extra: Vec<(&str, ColumnKind)>) -> Self {
        let mut columns: Vec<(String, ColumnKind)> = (0..dim)
            .map(|a| (format!("x{a}"), ColumnKind::Float))
            .collect();
        columns.extend(extra.into_iter().map(|(n, k)| (n.to_string(), k)));
        Schema { columns }
    }

    pub fn header(&self) -> String {
        self.columns
            .iter()
            .map(|(n, _)| n.as_str())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Shortest round-trip decimal form of a finite float.
pub fn float_cell(v: f64) -> Result<String> {
    if !v.is_finite() {
        return Err(Error::Numerical(format!(
            "artifact cell is not finite: {v}"
        )));
    }
    Ok(format!("{v}"))
}

pub fn int_cell(v: usize) -> String {
    format!("{v}")
}

/// Write rows against a schema; every row must match the column count and
/// the file ends with a newline.
pub fn write_csv(path: &Path, schema: &Schema, rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::with_capacity(32 * (rows.len() + 1));
    out.push_str(&schema.header());
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        if row.len() != schema.columns.len() {
            return Err(Error::InvalidInput(format!(
                "csv row {i} has {} cells, schema {} needs {}",
                row.len(),
                path.display(),
                schema.columns.len()
            )));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Check an emitted file against its schema: exact header, rectangular
/// rows, parseable and finite cells. Returns the data row count.
pub fn validate_csv(path: &Path, schema: &Schema) -> Result<usize> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header != schema.header() {
        return Err(Error::Parse(format!(
            "{}: header {header:?} does not match schema {:?}",
            path.display(),
            schema.header()
        )));
    }
    let mut count = 0usize;
    for (lineno, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != schema.columns.len() {
            return Err(Error::Parse(format!(
                "{}: row {lineno} has {} cells, expected {}",
                path.display(),
                cells.len(),
                schema.columns.len()
            )));
        }
        for (cell, (name, kind)) in cells.iter().zip(schema.columns.iter()) {
            match kind {
                ColumnKind::Float => {
                    let v: f64 = cell.parse().map_err(|_| {
                        Error::Parse(format!(
                            "{}: row {lineno} column {name}: bad float {cell:?}",
                            path.display()
                        ))
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Parse(format!(
                            "{}: row {lineno} column {name}: non-finite {cell:?}",
                            path.display()
                        )));
                    }
                }
                ColumnKind::Integer => {
                    cell.parse::<u64>().map_err(|_| {
                        Error::Parse(format!(
                            "{}: row {lineno} column {name}: bad integer {cell:?}",
                            path.display()
                        ))
                    })?;
                }
                ColumnKind::Text => {
                    if cell.is_empty() {
                        return Err(Error::Parse(format!(
                            "{}: row {lineno} column {name}: empty cell",
                            path.display()
                        )));
                    }
                }
            }
        }
        count += 1;
    }
    Ok(count)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("json encode: {e}")))?;
    fs::write(path, text + "\n")?;
    Ok(())
}
