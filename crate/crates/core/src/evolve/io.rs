//! Field serialisation.
//!
//! CSV: header `x,y,re,im`, one row per grid point in storage order
//! (row-major, y fastest), floats in shortest round-trip form.
//!
//! Binary, all little-endian:
//!
//! | offset | size | content                         |
//! |--------|------|---------------------------------|
//! | 0      | 8    | magic `MAGOSCWF`                |
//! | 8      | 4    | format version (u32, = 1)       |
//! | 12     | 4    | reserved (zero)                 |
//! | 16     | 8    | nx (u64)                        |
//! | 24     | 8    | ny (u64)                        |
//! | 32     | 32   | x_min, x_max, y_min, y_max (f64)|
//! | 64     | 16·nx·ny | (re, im) f64 pairs          |

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use super::grid::{Grid2D, WaveField};
use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 8] = b"MAGOSCWF";
pub const BINARY_VERSION: u32 = 1;
const HEADER_LEN: usize = 64;

pub fn write_csv(field: &WaveField, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let g = field.grid();
    let mut write = || -> std::io::Result<()> {
        writeln!(w, "x,y,re,im")?;
        for i in 0..g.nx {
            for j in 0..g.ny {
                let v = field.at(i, j);
                writeln!(w, "{},{},{},{}", g.x(i), g.y(j), v.re, v.im)?;
            }
        }
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

fn parse_error(path: &Path, msg: String) -> Error {
    Error::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, msg))
}

/// Reads a CSV written by [`write_csv`]; the grid is recovered from the
/// coordinate columns.
pub fn read_csv(path: &Path) -> Result<WaveField> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<[f64; 4]> = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if n == 0 {
            if line.trim() != "x,y,re,im" {
                return Err(parse_error(path, format!("unexpected header '{line}'")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut row = [0.0; 4];
        let mut fields = line.split(',');
        for slot in &mut row {
            *slot = fields
                .next()
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| parse_error(path, format!("line {}: malformed row", n + 1)))?;
        }
        rows.push(row);
    }
    let first = rows.first().ok_or_else(|| parse_error(path, "no data rows".into()))?;
    let ny = rows.iter().take_while(|r| r[0] == first[0]).count();
    if ny == 0 || rows.len() % ny != 0 {
        return Err(parse_error(path, "rows do not form a rectangular grid".into()));
    }
    let nx = rows.len() / ny;
    let last = rows[rows.len() - 1];
    let grid = Grid2D::new(nx, ny, (first[0], last[0]), (first[1], last[1]))?;
    let values = rows.iter().map(|r| Complex64::new(r[2], r[3])).collect();
    WaveField::new(grid, values)
}

pub fn write_binary(field: &WaveField, path: &Path) -> Result<()> {
    let g = field.grid();
    let mut buf = Vec::with_capacity(HEADER_LEN + 16 * g.len());
    buf.extend_from_slice(BINARY_MAGIC);
    buf.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    buf.extend_from_slice(&(g.nx as u64).to_le_bytes());
    buf.extend_from_slice(&(g.ny as u64).to_le_bytes());
    for v in [g.x_min, g.x_max, g.y_min, g.y_max] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for v in field.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_binary(path: &Path) -> Result<WaveField> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < HEADER_LEN || &bytes[..8] != BINARY_MAGIC {
        return Err(parse_error(path, "not a wave-field file".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32_at(8);
    if version != BINARY_VERSION {
        return Err(parse_error(path, format!("unsupported format version {version}")));
    }
    let (nx, ny) = (u64_at(16) as usize, u64_at(24) as usize);
    let grid = Grid2D::new(nx, ny, (f64_at(32), f64_at(40)), (f64_at(48), f64_at(56)))?;
    if bytes.len() != HEADER_LEN + 16 * grid.len() {
        return Err(parse_error(path, "payload length does not match header".into()));
    }
    let values = (0..grid.len())
        .map(|k| {
            let o = HEADER_LEN + 16 * k;
            Complex64::new(f64_at(o), f64_at(o + 8))
        })
        .collect();
    WaveField::new(grid, values)
}
