//! CSV and JSON rendering of rate tables.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use stagelab_core::RateTable;

use crate::cli::{Format, OutputArgs};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowOut {
    pub signature: String,
    pub rate: f64,
    pub normalized_rate: f64,
}

#[derive(Debug, Serialize)]
pub struct TableOut {
    pub detectors: Vec<String>,
    pub source_norm_sqr: f64,
    pub total: f64,
    pub rows: Vec<RowOut>,
    pub marginals: Vec<RowOut>,
}

pub fn format_for(out: &OutputArgs) -> Format {
    match out.format {
        Some(f) => f,
        None if out.out == "-" || out.out.ends_with(".json") => Format::Json,
        None => Format::Csv,
    }
}

pub fn rows(table: &RateTable) -> Vec<RowOut> {
    table
        .rows()
        .iter()
        .map(|r| RowOut { signature: table.label(r), rate: r.rate, normalized_rate: table.normalized(r) })
        .collect()
}

/// Per-detector totals, labelled `D&*`. Empty when every signature has at
/// most one detector, since the totals would repeat the rows.
pub fn marginals(table: &RateTable) -> Vec<RowOut> {
    if table.rows().iter().all(|r| r.signature.len() <= 1) {
        return Vec::new();
    }
    let norm = table.source_norm_sqr();
    table
        .detector_totals()
        .into_iter()
        .map(|(d, rate)| RowOut {
            signature: format!("{d}&*"),
            rate,
            normalized_rate: if norm > 0.0 { rate / norm } else { 0.0 },
        })
        .collect()
}

pub fn table_out(table: &RateTable) -> TableOut {
    TableOut {
        detectors: table.detectors().to_vec(),
        source_norm_sqr: table.source_norm_sqr(),
        total: table.total(),
        rows: rows(table),
        marginals: marginals(table),
    }
}

pub fn csv_bytes<T: Serialize>(records: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    w.into_inner().context("flushing CSV")
}

pub fn table_csv(table: &RateTable) -> Result<Vec<u8>> {
    let mut all = rows(table);
    all.extend(marginals(table));
    csv_bytes(&all)
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

/// Write to a path, or to standard output for `-`.
pub fn emit(out: &str, bytes: &[u8]) -> Result<()> {
    if out == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(bytes)?;
        stdout.flush()?;
    } else {
        std::fs::write(Path::new(out), bytes).with_context(|| format!("writing {out}"))?;
    }
    Ok(())
}
