//! Result tables.
//!
//! Rows are sorted by `(experiment, k, theta_or_channel, d, s, estimator)`
//! before emission, so the output does not depend on the order in which
//! workers finished.

use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::OutputFormat;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "experiment,k,theta_or_channel,d,s,estimator,trials,accuracy,stderr,advantage,seed,wall_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRow {
    pub experiment: String,
    pub k: usize,
    pub theta_or_channel: String,
    pub d: u32,
    pub s: f64,
    pub estimator: String,
    pub trials: u64,
    pub accuracy: f64,
    pub stderr: f64,
    pub advantage: f64,
    pub seed: u64,
    pub wall_ms: u64,
}

impl ResultRow {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.accuracy) {
            return Err(Error::Table(format!("accuracy {} outside [0, 1]", self.accuracy)));
        }
        if !(self.stderr >= 0.0) || (self.trials == 0 && self.stderr != 0.0) {
            return Err(Error::Table(format!("stderr {} inconsistent with {} trials", self.stderr, self.trials)));
        }
        Ok(())
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        (&self.experiment, self.k, &self.theta_or_channel, self.d)
            .cmp(&(&other.experiment, other.k, &other.theta_or_channel, other.d))
            .then(self.s.total_cmp(&other.s))
            .then(self.estimator.cmp(&other.estimator))
    }
}

pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| a.cmp_key(b));
}

/// Renders sorted rows. Empty input is an error.
pub fn render(rows: &[ResultRow], format: OutputFormat) -> Result<Vec<u8>> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    for r in rows {
        r.validate()?;
    }
    let mut sorted = rows.to_vec();
    sort_rows(&mut sorted);
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &sorted {
                w.serialize(r)?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
        OutputFormat::Json => {
            let mut out = serde_json::to_vec_pretty(&sorted)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

pub fn emit(rows: &[ResultRow], format: OutputFormat, path: &Path) -> Result<()> {
    let bytes = render(rows, format)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn parse_csv(src: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(src.as_bytes());
    let header = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::Table(format!("unexpected header {header:?}")));
    }
    let rows: Vec<ResultRow> = r.deserialize().collect::<std::result::Result<_, _>>()?;
    for row in &rows {
        row.validate()?;
    }
    Ok(rows)
}

pub fn parse_json(src: &str) -> Result<Vec<ResultRow>> {
    let rows: Vec<ResultRow> = serde_json::from_str(src)?;
    for row in &rows {
        row.validate()?;
    }
    Ok(rows)
}
