//! CSV profile dumps and the JSON Lines event log.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{Field, Grid};
use crate::stationary::StationaryProfile;

fn write_columns(path: &Path, header: &str, rows: impl Iterator<Item = (f64, f64)>) -> Result<()> {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for (x, v) in rows {
        // 17 significant digits round-trip every double
        writeln!(out, "{x:.16e},{v:.16e}").expect("writing to a String");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// `x,value` rows, one per node.
pub fn write_field_csv(path: &Path, field: &Field) -> Result<()> {
    write_columns(
        path,
        "x,value",
        field.grid.nodes().zip(field.values.iter().copied()),
    )
}

/// `x,s` rows of the closed-form stationary profile at the grid nodes.
pub fn write_stationary_csv(path: &Path, profile: &StationaryProfile, grid: &Grid) -> Result<()> {
    write_columns(path, "x,s", grid.nodes().map(|x| (x, profile.value(x))))
}

/// Reads the value column of an `x,<name>` CSV.
pub fn read_profile_csv(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let v = line
            .split(',')
            .nth(1)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::Parse(format!("{}: bad row {}", path.display(), i + 1)))?;
        values.push(v);
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub j: usize,
    pub t: f64,
    pub reset_intervals: Vec<usize>,
    pub min_eta: f64,
    pub pre_csv: String,
    pub post_csv: String,
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
