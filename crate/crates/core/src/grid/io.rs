//! Grid file formats.
//!
//! * CSV: one value per line in 1-d; `N` lines of `N` comma-separated values
//!   (row-major, line = first axis) in 2-d.
//! * Binary: 16-byte header (`b"OSLX"`, `u32` dim, `u32` N, `u32` reserved = 0)
//!   followed by `N^d` little-endian `f64` values, row-major.

use std::fs;
use std::path::Path;

use super::GridFunction;
use crate::error::{Error, Result};
use crate::report::fmt_f64;

pub const MAGIC: &[u8; 4] = b"OSLX";
pub const HEADER_LEN: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridFormat {
    Csv,
    Binary,
}

impl GridFormat {
    /// `.bin` and `.oslx` files are binary; everything else is CSV.
    pub fn from_path(path: &Path) -> GridFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("oslx") => GridFormat::Binary,
            _ => GridFormat::Csv,
        }
    }
}

/// Reads a grid, detecting the binary format by its magic bytes.
pub fn read_grid(path: &Path) -> Result<GridFunction> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        parse_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|e| Error::parse(format!("byte {}", e.utf8_error().valid_up_to()), "not UTF-8"))?;
        parse_csv(&text)
    }
}

pub fn write_grid(path: &Path, f: &GridFunction, format: GridFormat) -> Result<()> {
    match format {
        GridFormat::Csv => fs::write(path, to_csv(f))?,
        GridFormat::Binary => fs::write(path, to_binary(f))?,
    }
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<GridFunction> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .collect::<Vec<_>>();
    let end = lines.iter().rposition(|l| !l.trim().is_empty()).map_or(0, |p| p + 1);
    let lines = &lines[..end];
    if lines.is_empty() {
        return Err(Error::parse("line 1", "empty grid file"));
    }
    let dim = if lines.iter().any(|l| l.contains(',')) { 2 } else { 1 };
    let n = lines.len();
    let mut values = Vec::with_capacity(if dim == 2 { n * n } else { n });
    for (li, line) in lines.iter().enumerate() {
        let fields: Vec<&str> = if dim == 2 { line.split(',').collect() } else { vec![line] };
        if dim == 2 && fields.len() != n {
            return Err(Error::parse(
                format!("line {}", li + 1),
                format!("expected {n} comma-separated values, found {}", fields.len()),
            ));
        }
        for (ci, field) in fields.iter().enumerate() {
            let tok = field.trim();
            let v: f64 = tok.parse().map_err(|_| {
                Error::parse(format!("line {}, column {}", li + 1, ci + 1), format!("invalid number {tok:?}"))
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    format!("line {}, column {}", li + 1, ci + 1),
                    format!("non-finite value {tok:?}"),
                ));
            }
            values.push(v);
        }
    }
    if !n.is_power_of_two() {
        return Err(Error::parse(
            format!("line {n}"),
            format!("grid has {n} rows; N must be a power of two"),
        ));
    }
    GridFunction::new(dim, n, values)
}

pub fn to_csv(f: &GridFunction) -> String {
    let n = f.resolution();
    let mut out = String::new();
    if f.dim() == 1 {
        for v in f.values() {
            out.push_str(&fmt_f64(*v));
            out.push('\n');
        }
    } else {
        for row in f.values().chunks(n) {
            let line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
    }
    out
}

pub fn parse_binary(bytes: &[u8]) -> Result<GridFunction> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::parse(
            format!("byte {}", bytes.len()),
            format!("truncated header: need {HEADER_LEN} bytes"),
        ));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::parse("byte 0", "bad magic, expected \"OSLX\""));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let dim = word(4) as usize;
    let n = word(8) as usize;
    if dim != 1 && dim != 2 {
        return Err(Error::parse("byte 4", format!("dimension must be 1 or 2, got {dim}")));
    }
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::parse("byte 8", format!("N must be a power of two, got {n}")));
    }
    let cells = n.pow(dim as u32);
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != cells * 8 {
        return Err(Error::parse(
            format!("byte {}", HEADER_LEN + payload.len().min(cells * 8)),
            format!("expected {} payload bytes, found {}", cells * 8, payload.len()),
        ));
    }
    let mut values = Vec::with_capacity(cells);
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::parse(format!("byte {}", HEADER_LEN + 8 * i), "non-finite value"));
        }
        values.push(v);
    }
    GridFunction::new(dim, n, values)
}

pub fn to_binary(f: &GridFunction) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * f.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(f.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(f.resolution() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}
