//! IWF1 field files.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `IWF1` |
//! | 4     | `u32` nx |
//! | 4     | `u32` ny |
//! | 4     | `u32` level |
//! | 8     | `u64` inside-point count |
//! | 4     | `u32` run count `r` |
//! | 4 r   | `u32` mask runs in row-major order, alternating outside/inside, starting with an outside run (possibly empty) |
//! | 8 m   | `f64` values of the `m` inside points in row-major order |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::ImmersedGrid;

pub const MAGIC: &[u8; 4] = b"IWF1";

/// A field on a square periodic grid; outside points are NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    pub level: u32,
    pub mask: Vec<bool>,
    pub values: Vec<f64>,
}

impl FieldFile {
    /// Errors unless the file has the level and inside mask of `grid`.
    pub fn check_grid(&self, grid: &ImmersedGrid) -> Result<()> {
        if grid.level() != self.level || grid.mask() != self.mask.as_slice() {
            return Err(Error::MaskMismatch(format!(
                "level-{} field against the level-{} grid",
                self.level,
                grid.level()
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        1 << self.level
    }

    pub fn from_grid(grid: &ImmersedGrid, values: &[f64]) -> Self {
        FieldFile {
            level: grid.level(),
            mask: grid.mask().to_vec(),
            values: values.to_vec(),
        }
    }
}

/// Run lengths of `mask`, starting with an outside run.
pub fn mask_runs(mask: &[bool]) -> Vec<u32> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut count = 0u32;
    for &m in mask {
        if m != current {
            runs.push(count);
            current = m;
            count = 0;
        }
        count += 1;
    }
    runs.push(count);
    runs
}

pub fn expand_runs(runs: &[u32]) -> Vec<bool> {
    let mut mask = Vec::new();
    for (k, &r) in runs.iter().enumerate() {
        mask.resize(mask.len() + r as usize, k % 2 == 1);
    }
    mask
}

pub fn encode_field(field: &FieldFile) -> Result<Vec<u8>> {
    let n = field.n();
    if field.mask.len() != n * n || field.values.len() != n * n {
        return Err(Error::Format(format!(
            "field arrays do not match a {n}x{n} grid"
        )));
    }
    let runs = mask_runs(&field.mask);
    let inside = field.mask.iter().filter(|&&m| m).count();
    let mut out = Vec::with_capacity(28 + 4 * runs.len() + 8 * inside);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&field.level.to_le_bytes());
    out.extend_from_slice(&(inside as u64).to_le_bytes());
    out.extend_from_slice(&(runs.len() as u32).to_le_bytes());
    for r in &runs {
        out.extend_from_slice(&r.to_le_bytes());
    }
    for (v, &m) in field.values.iter().zip(&field.mask) {
        if m {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.pos + k > self.bytes.len() {
            return Err(Error::Format("truncated IWF1 data".into()));
        }
        let s = &self.bytes[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_field(bytes: &[u8]) -> Result<FieldFile> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4)? != MAGIC {
        return Err(Error::Format("bad magic, expected IWF1".into()));
    }
    let nx = c.u32()?;
    let ny = c.u32()?;
    let level = c.u32()?;
    if nx != ny || level > 16 || nx != 1 << level {
        return Err(Error::Format(format!(
            "inconsistent dimensions {nx}x{ny} at level {level}"
        )));
    }
    let n = nx as usize;
    let inside = c.u64()? as usize;
    let nruns = c.u32()? as usize;
    if nruns > n * n + 1 {
        return Err(Error::Format(format!(
            "{nruns} mask runs for {n}x{n} points"
        )));
    }
    let runs = (0..nruns).map(|_| c.u32()).collect::<Result<Vec<_>>>()?;
    if runs.iter().map(|&r| r as u64).sum::<u64>() != (n * n) as u64 {
        return Err(Error::Format("mask runs do not cover the grid".into()));
    }
    let mask = expand_runs(&runs);
    if mask.iter().filter(|&&m| m).count() != inside {
        return Err(Error::Format(format!(
            "header claims {inside} inside points, mask has {}",
            mask.iter().filter(|&&m| m).count()
        )));
    }
    let mut values = vec![f64::NAN; n * n];
    for (v, &m) in values.iter_mut().zip(&mask) {
        if m {
            *v = c.f64()?;
        }
    }
    if c.pos != bytes.len() {
        return Err(Error::Format("trailing bytes after field data".into()));
    }
    Ok(FieldFile {
        level,
        mask,
        values,
    })
}

pub fn write_field(path: &Path, field: &FieldFile) -> Result<()> {
    let bytes = encode_field(field)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a field; when `grid` is given its mask must match the file's.
pub fn read_field(path: &Path, grid: Option<&ImmersedGrid>) -> Result<FieldFile> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    let field = decode_field(&bytes)?;
    if let Some(g) = grid {
        field.check_grid(g).map_err(|_| {
            Error::MaskMismatch(format!(
                "{} does not match the level-{} grid",
                path.display(),
                g.level()
            ))
        })?;
    }
    Ok(field)
}
