//! Matrix CSV files: one row per state, comma-separated reals, `#` lines
//! ignored.

use std::fmt::Write as _;

use crate::cone::StateMatrix;
use crate::error::{Error, Result};

pub fn parse_matrix_csv(text: &str) -> Result<StateMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("{f:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no matrix rows".into(),
        });
    }
    StateMatrix::from_rows(&rows)
}

pub fn read_matrix_csv(path: &std::path::Path) -> Result<StateMatrix> {
    parse_matrix_csv(&std::fs::read_to_string(path)?)
}

/// Shortest round-trip formatting, so parsing the output reproduces the
/// matrix exactly.
pub fn format_matrix_csv(c: &StateMatrix) -> String {
    let mut out = String::new();
    for row in c.rows() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}
