//! `KPF2` binary field container.
//!
//! Layout (little-endian):
//!
//! | offset | size | content                          |
//! |--------|------|----------------------------------|
//! | 0      | 4    | magic `b"KPF2"`                  |
//! | 4      | 4    | zero                             |
//! | 8      | 8    | `Nx` as f64                      |
//! | 16     | 8    | `Ny` as f64                      |
//! | 24     | 8    | `Lx` as f64                      |
//! | 32     | 8    | `Ly` as f64                      |
//! | 40     | 24   | zero                             |
//! | 64     | 16·Nx·Ny | `(re, im)` pairs, ξ-major FFT order |

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{KpError, Result};
use crate::field::Field2D;
use crate::grid::Grid2D;

pub const MAGIC: &[u8; 4] = b"KPF2";
pub const HEADER_LEN: usize = 64;

pub fn encode(field: &Field2D) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[0u8; 4]);
    for v in [g.nx() as f64, g.ny() as f64, g.lx(), g.ly()] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.resize(HEADER_LEN, 0);
    for c in field.coeffs() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

fn f64_at(buf: &[u8], off: usize) -> f64 {
    let mut b = [0u8; 8];
    b.copy_from_slice(&buf[off..off + 8]);
    f64::from_le_bytes(b)
}

fn mode_count(v: f64, name: &str) -> Result<usize> {
    if v.fract() != 0.0 || !(1.0..=(1u64 << 32) as f64).contains(&v) {
        return Err(KpError::Format(format!("{name} = {v} is not a valid mode count")));
    }
    Ok(v as usize)
}

pub fn decode(bytes: &[u8]) -> Result<Field2D> {
    if bytes.len() < HEADER_LEN {
        return Err(KpError::Format("truncated header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(KpError::Format("bad magic".into()));
    }
    let nx = mode_count(f64_at(bytes, 8), "Nx")?;
    let ny = mode_count(f64_at(bytes, 16), "Ny")?;
    let grid = Grid2D::new(f64_at(bytes, 24), f64_at(bytes, 32), nx, ny)
        .map_err(|e| KpError::Format(e.to_string()))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 16 * grid.len() {
        return Err(KpError::Format(format!(
            "expected {} payload bytes, found {}",
            16 * grid.len(),
            body.len()
        )));
    }
    let coeffs = body
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8)))
        .collect();
    Field2D::from_coeffs(&grid, coeffs)
}

pub fn write_to(field: &Field2D, mut w: impl Write) -> Result<()> {
    w.write_all(&encode(field))?;
    Ok(())
}

pub fn read_from(mut r: impl Read) -> Result<Field2D> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    decode(&buf)
}

pub fn save(field: &Field2D, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode(field))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Field2D> {
    decode(&std::fs::read(path)?)
}
