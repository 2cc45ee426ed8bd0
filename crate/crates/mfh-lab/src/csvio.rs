//! Minimal CSV reading/writing for the fixed schemas used by this crate.
//!
//! Every file this laboratory emits has a known header and purely
//! numeric/enumerated fields (no quoting, no embedded commas), so a tiny
//! hand-rolled layer keeps full control over canonical float formatting —
//! a requirement for byte-identical reruns.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Canonical float formatting: shortest representation that round-trips,
/// with negative zero normalized so equal values always print identically.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x}")
}

/// Write a CSV file with the given header and rows, using `\n` line
/// endings regardless of platform.
pub fn write_csv<P: AsRef<Path>>(
    path: P,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut buf = String::new();
    buf.push_str(&header.join(","));
    buf.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "row width must match header");
        buf.push_str(&row.join(","));
        buf.push('\n');
    }
    let mut f = fs::File::create(path)?;
    f.write_all(buf.as_bytes())?;
    Ok(())
}

/// Read a CSV file, returning `(header, rows)`. Validates rectangular
/// shape and reports the offending line on mismatch.
pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    let (_, header_line) = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty file", path.display())))?;
    let header: Vec<String> = header_line.split(',').map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let row: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if row.len() != header.len() {
            return Err(Error::Config(format!(
                "{}: line {} has {} fields, expected {}",
                path.display(),
                idx + 1,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Parse a float field, reporting the file/line/column on failure.
pub fn parse_f64(field: &str, context: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{context}: cannot parse '{field}' as a number")))
}

/// Parse an unsigned integer field with context in the error.
pub fn parse_usize(field: &str, context: &str) -> Result<usize> {
    field
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("{context}: cannot parse '{field}' as an integer")))
}
