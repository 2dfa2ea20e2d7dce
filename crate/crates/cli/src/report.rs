//! Summary and iteration-log CSV files.

use anyhow::Context;
use evsp::master::IterationLog;
use serde::Serialize;
use std::fs::OpenOptions;
use std::path::Path;

/// One row of the summary file. Column order is part of the interface.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub instance: String,
    pub mode: String,
    pub status: String,
    /// Best solution cost, empty when none.
    pub ub: Option<f64>,
    pub vehicles: Option<usize>,
    pub driving_cost: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub nodes: usize,
    /// Wall-clock seconds, two decimals.
    pub time: String,
}

/// Append rows to a CSV file, writing the header only into an empty file.
fn append<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let empty = file.metadata()?.len() == 0;
    let mut w = csv::WriterBuilder::new()
        .has_headers(empty)
        .from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn append_summary(path: &Path, row: &SummaryRow) -> anyhow::Result<()> {
    append(path, std::slice::from_ref(row))
}

pub fn write_log(path: &Path, log: &[IterationLog]) -> anyhow::Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for l in log {
        w.serialize(l)?;
    }
    w.flush()?;
    Ok(())
}
