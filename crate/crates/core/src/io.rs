//! Design and output files.
//!
//! Designs are CSV with a header `x1,...,xn` and an optional trailing
//! `weight` column; outputs are CSV with a single `y` column. Reals are
//! written with 17 significant digits so files round-trip exactly.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::designs::Design;
use crate::error::{Error, Result};

/// 17-significant-digit rendering used in files and cache keys.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn design_to_csv(design: &Design) -> String {
    let n = design.dim();
    let mut out = String::new();
    let header: Vec<String> = (1..=n).map(|j| format!("x{j}")).collect();
    out.push_str(&header.join(","));
    if design.weights().is_some() {
        out.push_str(",weight");
    }
    out.push('\n');
    for (i, row) in design.rows().enumerate() {
        let mut fields: Vec<String> = row.iter().map(|&v| fmt17(v)).collect();
        if let Some(w) = design.weights() {
            fields.push(fmt17(w[i]));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_design(path: impl AsRef<Path>, design: &Design) -> Result<()> {
    std::fs::write(path, design_to_csv(design))?;
    Ok(())
}

fn parse_rows(path: &Path, text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Malformed {
            path: path.to_path_buf(),
            message: "empty file".into(),
        })?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Malformed {
                path: path.to_path_buf(),
                message: format!("row {}: {e}", i + 1),
            })?;
        if row.len() != header.len() {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                message: format!("row {} has {} fields, header has {}", i + 1, row.len(), header.len()),
            });
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn read_design(path: impl AsRef<Path>) -> Result<Design> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let (header, mut rows) = parse_rows(path, &text)?;
    let weighted = header.last().is_some_and(|h| h == "weight");
    let weights = weighted.then(|| rows.iter_mut().map(|r| r.pop().unwrap_or(0.0)).collect());
    Design::from_rows(rows, weights)
}

pub fn outputs_to_csv(values: &[f64]) -> String {
    let mut out = String::from("y\n");
    for v in values {
        let _ = writeln!(out, "{}", fmt17(*v));
    }
    out
}

pub fn write_outputs(path: impl AsRef<Path>, values: &[f64]) -> Result<()> {
    std::fs::write(path, outputs_to_csv(values))?;
    Ok(())
}

/// Read one value per line. A non-numeric first line is taken as a header.
pub fn read_outputs(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_outputs(path, &text)
}

pub(crate) fn parse_outputs(path: &Path, text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if i == 0 => {}
            Err(e) => {
                return Err(Error::Malformed {
                    path: path.to_path_buf(),
                    message: format!("line {}: {e}", i + 1),
                })
            }
        }
    }
    Ok(out)
}

/// SHA-256 over the 17-digit rendering of a design and its outputs.
pub fn digest_data(design: &Design, outputs: &[f64]) -> String {
    let mut h = Sha256::new();
    h.update(design.dim().to_le_bytes());
    for row in design.rows() {
        for v in row {
            h.update(fmt17(*v).as_bytes());
            h.update(b",");
        }
        h.update(b"\n");
    }
    for v in outputs {
        h.update(fmt17(*v).as_bytes());
        h.update(b"\n");
    }
    hex(&h.finalize())
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}
