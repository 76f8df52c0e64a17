//! File output: atomic writes, CSV dumps with round-trip float formatting,
//! and the wave CSV reader used for file-based initial data.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solitary::IterationTrace;
use crate::spectral::SpectralGrid;
use crate::state::StatePair;

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &bytes)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Nodal wave dump with columns `x, zeta, u`.
pub fn write_wave_csv(path: &Path, grid: &SpectralGrid, state: &StatePair) -> Result<()> {
    let (zeta, u) = state.to_nodal(grid)?;
    let rows = grid
        .nodes()
        .into_iter()
        .zip(zeta.into_iter().zip(u))
        .map(|(x, (z, v))| vec![fmt_f64(x), fmt_f64(z), fmt_f64(v)]);
    write_csv(path, &["x", "zeta", "u"], rows)
}

/// Snapshot dump with columns `t, x, zeta, u`.
pub fn write_snapshot_csv(path: &Path, t: f64, grid: &SpectralGrid, state: &StatePair) -> Result<()> {
    let (zeta, u) = state.to_nodal(grid)?;
    let rows = grid
        .nodes()
        .into_iter()
        .zip(zeta.into_iter().zip(u))
        .map(|(x, (z, v))| vec![fmt_f64(t), fmt_f64(x), fmt_f64(z), fmt_f64(v)]);
    write_csv(path, &["t", "x", "zeta", "u"], rows)
}

/// Trace dump with columns `iter, residual, m_factor, phase`.
pub fn write_trace_csv(path: &Path, trace: &IterationTrace) -> Result<()> {
    let rows = trace.entries.iter().map(|e| {
        vec![
            e.iter.to_string(),
            fmt_f64(e.residual),
            fmt_f64(e.m_factor),
            e.phase.as_str().to_owned(),
        ]
    });
    write_csv(path, &["iter", "residual", "m_factor", "phase"], rows)
}

/// Reads a wave CSV (`x, zeta, u`, any extra columns ignored) sampled on `grid`.
pub fn read_wave_csv(path: &Path, grid: &SpectralGrid) -> Result<StatePair> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::Config {
            key: "initial.path".into(),
            reason: format!("{} has no `{name}` column", path.display()),
        })
    };
    let (ix, iz, iu) = (column("x")?, column("zeta")?, column("u")?);
    let (mut xs, mut zeta, mut u) = (vec![], vec![], vec![]);
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config {
                    key: "initial.path".into(),
                    reason: format!("unparsable value in {}", path.display()),
                })
        };
        xs.push(field(ix)?);
        zeta.push(field(iz)?);
        u.push(field(iu)?);
    }
    if xs.len() != grid.len() {
        return Err(Error::Config {
            key: "initial.path".into(),
            reason: format!("{} rows for a grid of {} nodes", xs.len(), grid.len()),
        });
    }
    let h = grid.spacing();
    if let Some(j) = (0..xs.len()).find(|&j| (xs[j] - grid.node(j)).abs() > 1e-9 * h.max(1.0)) {
        return Err(Error::Config {
            key: "initial.path".into(),
            reason: format!("row {j} has x = {} but the grid node is {}", xs[j], grid.node(j)),
        });
    }
    StatePair::from_nodal(grid, &zeta, &u)
}
