//! Crystal geometry tables.
//!
//! One row per impedance step: `step  z0_ohm  length_mm`, separated by
//! whitespace or commas. Blank lines and `#` comments are skipped, as is a
//! single non-numeric header line.

use std::path::Path;

use crate::error::{Error, Result};

/// Geometry of the fabricated crystal, port 1 (cavity side) first.
pub const DEVICE_TABLE: &str = include_str!("../data/crystal.txt");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub step: usize,
    pub z0_ohm: f64,
    pub length_mm: f64,
}

pub fn read_crystal_table(path: &Path) -> Result<Vec<TableRow>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_crystal_table(&text, path)
}

/// Parses table text; `origin` is only used to label errors.
pub fn parse_crystal_table(text: &str, origin: &Path) -> Result<Vec<TableRow>> {
    let err = |row: usize, reason: String| Error::Table {
        path: origin.to_path_buf(),
        row,
        reason,
    };
    let mut rows = Vec::new();
    let mut seen_data = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let row_no = rows.len() + 1;
        if !seen_data && fields.iter().all(|f| f.parse::<f64>().is_err()) {
            // header
            seen_data = true;
            continue;
        }
        seen_data = true;
        if fields.len() != 3 {
            return Err(err(
                row_no,
                format!(
                    "line {}: expected 3 columns (step, z0_ohm, length_mm), found {}",
                    lineno + 1,
                    fields.len()
                ),
            ));
        }
        let step: usize = fields[0]
            .parse()
            .map_err(|_| err(row_no, format!("step index {:?} is not an integer", fields[0])))?;
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| err(row_no, format!("{what} {s:?} is not a number")))
        };
        let z0_ohm = num(fields[1], "impedance")?;
        let length_mm = num(fields[2], "length")?;
        if !(z0_ohm.is_finite() && z0_ohm > 0.0) {
            return Err(err(row_no, format!("impedance must be positive, got {z0_ohm}")));
        }
        if !(length_mm.is_finite() && length_mm > 0.0) {
            return Err(err(row_no, format!("length must be positive, got {length_mm}")));
        }
        if step != row_no {
            return Err(err(
                row_no,
                format!("step index {step} out of sequence, expected {row_no}"),
            ));
        }
        rows.push(TableRow {
            step,
            z0_ohm,
            length_mm,
        });
    }
    if rows.is_empty() {
        return Err(err(0, "table holds no sections".into()));
    }
    Ok(rows)
}

/// `(z0 ohm, length m)` pairs for [`crate::network::build_crystal`].
pub fn to_section_rows(rows: &[TableRow]) -> Vec<(f64, f64)> {
    rows.iter().map(|r| (r.z0_ohm, r.length_mm * 1e-3)).collect()
}
