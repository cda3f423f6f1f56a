//! Field files, run configuration, CSV tables and plots.

mod config;
mod field;
mod plot;

use std::path::Path;

pub use config::{CompressConfig, DiffusionConfig, RunConfig, Sweep};
pub use field::{
    decode_field, encode_field, expand_runs, mask_runs, read_field, write_field, FieldFile, MAGIC,
};
pub use plot::{emit_loglog_plot, render_loglog, PlotSpec, Series};

use crate::error::{Error, Result};

/// Writes a header row and numeric rows. Floats use the shortest
/// representation that reads back bit-exactly.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| format_float(v)))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Shortest round-trip representation, in exponent form for very small or
/// large magnitudes.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Reads the first two columns of a CSV with a header row.
pub fn read_pairs_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let get = |c: usize| -> Result<f64> {
            rec.get(c)
                .ok_or_else(|| Error::Format(format!("row {} has fewer than two columns", k + 1)))?
                .trim()
                .parse()
                .map_err(|_| {
                    Error::Format(format!("row {}: column {} is not a number", k + 1, c + 1))
                })
        };
        out.push((get(0)?, get(1)?));
    }
    Ok(out)
}
