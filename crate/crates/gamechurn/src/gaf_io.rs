//! Dumps of GAF matrices and activity images.

use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::labels::{create, open};
use crate::matrix_io::format_float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DumpFormat {
    Csv,
    Binary,
}

impl FromStr for DumpFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(DumpFormat::Csv),
            "binary" => Ok(DumpFormat::Binary),
            _ => Err(Error::config(format!("unknown dump format {s:?} (csv, binary)"))),
        }
    }
}

/// Writes a row-major `rows x cols` grid. Binary layout: u32 LE rows,
/// u32 LE cols, then f64 LE values.
pub fn write_grid<W: Write>(mut w: W, rows: usize, cols: usize, data: &[f64], format: DumpFormat) -> Result<()> {
    if data.len() != rows * cols {
        return Err(Error::Core(gamechurn_core::Error::Length(format!(
            "{} values for a {rows}x{cols} grid",
            data.len()
        ))));
    }
    let io = |e: std::io::Error| Error::Io(e.to_string());
    match format {
        DumpFormat::Csv => {
            for r in 0..rows {
                let line: Vec<String> = data[r * cols..(r + 1) * cols].iter().map(|v| format_float(*v)).collect();
                writeln!(w, "{}", line.join(",")).map_err(io)?;
            }
        }
        DumpFormat::Binary => {
            let dims = |n: usize| u32::try_from(n).map_err(|_| Error::config("grid dimension exceeds u32"));
            w.write_all(&dims(rows)?.to_le_bytes()).map_err(io)?;
            w.write_all(&dims(cols)?.to_le_bytes()).map_err(io)?;
            for v in data {
                w.write_all(&v.to_le_bytes()).map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}

pub fn write_grid_file(path: &Path, rows: usize, cols: usize, data: &[f64], format: DumpFormat) -> Result<()> {
    write_grid(BufWriter::new(create(path)?), rows, cols, data, format)
}

/// Reads a binary grid back as `(rows, cols, data)`.
pub fn read_binary_grid<R: Read>(mut r: R) -> Result<(usize, usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| Error::Io(e.to_string()))?;
    if bytes.len() < 8 {
        return Err(Error::format("binary grid shorter than its header"));
    }
    let rows = u32::from_le_bytes(bytes[0..4].try_into().expect("4 bytes")) as usize;
    let cols = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let body = &bytes[8..];
    if body.len() != rows * cols * 8 {
        return Err(Error::format(format!(
            "binary grid body holds {} bytes, expected {}",
            body.len(),
            rows * cols * 8
        )));
    }
    let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok((rows, cols, data))
}

pub fn read_binary_grid_file(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    read_binary_grid(open(path)?)
}
