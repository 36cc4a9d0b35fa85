//! CSV trajectories and JSON-lines round logs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::experiments::TrajectoryRecord;
use crate::{Error, Result};

pub const CSV_COLUMNS: [&str; 15] = [
    "run_id",
    "seed",
    "k",
    "t",
    "y_k",
    "toff_ms",
    "gradient_estimate",
    "truncated",
    "s_lte_bps",
    "s_wifi_mean_bps",
    "n",
    "toff_opt_ms",
    "s_lte_opt_bps",
    "s_wifi_opt_bps",
    "regret_so_far",
];

/// One CSV line; field order is the column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub run_id: usize,
    pub seed: u64,
    pub k: u64,
    pub t: u64,
    pub y_k: f64,
    pub toff_ms: f64,
    /// Before truncation.
    pub gradient_estimate: f64,
    pub truncated: bool,
    pub s_lte_bps: f64,
    pub s_wifi_mean_bps: f64,
    pub n: u32,
    pub toff_opt_ms: f64,
    pub s_lte_opt_bps: f64,
    pub s_wifi_opt_bps: f64,
    pub regret_so_far: f64,
}

/// One played round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventLine {
    pub run_id: usize,
    pub seed: u64,
    pub t: u64,
    pub k: u64,
    pub x: f64,
    pub cost: f64,
    pub observed: f64,
    pub n: u32,
}

pub fn csv_rows(records: &[TrajectoryRecord]) -> Vec<CsvRow> {
    records
        .iter()
        .flat_map(|rec| {
            rec.iterations.iter().map(move |it| CsvRow {
                run_id: rec.run_id,
                seed: rec.seed,
                k: it.k,
                t: it.t,
                y_k: it.y,
                toff_ms: it.toff * 1e3,
                gradient_estimate: it.raw_gradient,
                truncated: it.truncated,
                s_lte_bps: it.s_lte,
                s_wifi_mean_bps: it.s_wifi_mean,
                n: it.stations,
                toff_opt_ms: it.opt_toff * 1e3,
                s_lte_opt_bps: it.s_lte_opt,
                s_wifi_opt_bps: it.s_wifi_opt,
                regret_so_far: it.regret_so_far,
            })
        })
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

/// Header row, then one row per (replication, iteration).
pub fn write_csv(records: &[TrajectoryRecord], path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(create(path)?);
    w.write_record(CSV_COLUMNS).map_err(|e| csv_error(path, e))?;
    for row in csv_rows(records) {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "unexpected header".into(),
        });
    }
    r.deserialize().map(|row| row.map_err(|e| csv_error(path, e))).collect()
}

pub fn write_events(records: &[TrajectoryRecord], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    for rec in records {
        for e in &rec.events {
            let line = EventLine {
                run_id: rec.run_id,
                seed: rec.seed,
                t: e.t,
                k: e.k,
                x: e.x,
                cost: e.cost,
                observed: e.observed,
                n: e.stations,
            };
            serde_json::to_writer(&mut w, &line).map_err(|e| Error::io(path, e.into()))?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_events(path: &Path) -> Result<Vec<EventLine>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: format!("line {}: {e}", i + 1),
        })?);
    }
    Ok(out)
}
