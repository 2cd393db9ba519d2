//! Field file formats.
//!
//! `AFP1` binary layout, all little-endian:
//!
//! ```text
//! b"AFP1" | n: u32 | L: f64 | n² × (re: f64, im: f64), row-major
//! ```
//!
//! CSV export writes a `x,y,value` header followed by one row per node.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::grid::{DensityField, Field, Grid};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"AFP1";

pub fn write_field<W: Write>(mut w: W, u: &Field) -> Result<()> {
    let g = u.grid();
    w.write_all(MAGIC)?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    w.write_all(&g.half_width().to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * g.len());
    for v in u.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<Field> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let l = f64::from_le_bytes(b8);
    let grid = Grid::new(l, n)?;
    let mut raw = vec![0u8; 16 * grid.len()];
    r.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Field::new(grid, values)
}

pub fn save_field(path: impl AsRef<Path>, u: &Field) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_field(std::io::BufWriter::new(f), u)
}

pub fn load_field(path: impl AsRef<Path>) -> Result<Field> {
    let f = std::fs::File::open(path)?;
    read_field(std::io::BufReader::new(f))
}

pub fn write_density_csv<W: Write>(mut w: W, f: &DensityField) -> Result<()> {
    writeln!(w, "x,y,value")?;
    for ((x, y), v) in f.grid().points().zip(f.values()) {
        writeln!(w, "{x},{y},{v}")?;
    }
    Ok(())
}

/// Reads a `x,y,value` CSV written on `grid`; coordinates must match the grid nodes.
pub fn read_density_csv<R: Read>(mut r: R, grid: &Grid) -> Result<DensityField> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut values = Vec::with_capacity(grid.len());
    let tol = 1e-9 * grid.half_width();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with('x')) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(Error::Parse(format!("line {}: expected 3 columns", lineno + 1)));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)));
        let (x, y, v) = (parse(cols[0])?, parse(cols[1])?, parse(cols[2])?);
        let idx = values.len();
        if idx >= grid.len() {
            return Err(Error::Parse("more rows than grid nodes".into()));
        }
        let (gx, gy) = grid.point(idx);
        if (gx - x).abs() > tol || (gy - y).abs() > tol {
            let n_found = ((values.len() + 1) as f64).sqrt() as usize;
            return Err(Error::GridMismatch {
                expected_n: grid.n(),
                expected_l: grid.half_width(),
                found_n: n_found,
                found_l: x.abs().max(y.abs()),
            });
        }
        values.push(v);
    }
    if values.len() != grid.len() {
        let found_n = (values.len() as f64).sqrt().round() as usize;
        return Err(Error::GridMismatch {
            expected_n: grid.n(),
            expected_l: grid.half_width(),
            found_n,
            found_l: f64::NAN,
        });
    }
    DensityField::new(*grid, values)
}
