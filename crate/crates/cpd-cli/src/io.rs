// SPDX-License-Identifier: MIT OR Apache-2.0

//! File formats: series files (text or little-endian binary), ground-truth
//! files, detection reports, and the experiment CSV.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use cpd_core::changepoint::EstimateReport;

use crate::{CliError, Result};

/// On-disk encoding of a series file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeriesFormat {
    /// One decimal real per line, optional `value` header line.
    #[default]
    Text,
    /// Raw little-endian 8-byte reals, no header.
    Binary,
}

pub fn write_series(path: &Path, data: &[f64], format: SeriesFormat) -> Result<()> {
    match format {
        SeriesFormat::Text => {
            let mut out = String::with_capacity(data.len() * 20 + 6);
            out.push_str("value\n");
            for v in data {
                // `{}` prints the shortest representation that round-trips.
                out.push_str(&format!("{v}\n"));
            }
            fs::write(path, out)?;
        }
        SeriesFormat::Binary => {
            let mut out = Vec::with_capacity(data.len() * 8);
            for v in data {
                out.extend_from_slice(&v.to_le_bytes());
            }
            fs::write(path, out)?;
        }
    }
    Ok(())
}

pub fn read_series(path: &Path, format: SeriesFormat) -> Result<Vec<f64>> {
    match format {
        SeriesFormat::Text => {
            let text = fs::read_to_string(path)?;
            let mut values = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || (i == 0 && line.eq_ignore_ascii_case("value")) {
                    continue;
                }
                let v: f64 = line.parse().map_err(|_| {
                    CliError::Parse(format!(
                        "{}:{}: expected a decimal real, got {line:?}",
                        path.display(),
                        i + 1
                    ))
                })?;
                values.push(v);
            }
            if values.is_empty() {
                return Err(CliError::Parse(format!("{}: no samples", path.display())));
            }
            Ok(values)
        }
        SeriesFormat::Binary => {
            let bytes = fs::read(path)?;
            if bytes.is_empty() || bytes.len() % 8 != 0 {
                return Err(CliError::Parse(format!(
                    "{}: binary series length {} is not a positive multiple of 8",
                    path.display(),
                    bytes.len()
                )));
            }
            Ok(bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect())
        }
    }
}

/// Ground truth: one change-point parameter per line, ascending.
pub fn write_truth(path: &Path, theta: &[f64]) -> Result<()> {
    let mut out = String::from("theta\n");
    for t in theta {
        out.push_str(&format!("{t}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_truth(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut theta = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.eq_ignore_ascii_case("theta")) {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            CliError::Parse(format!("{}:{}: bad change-point parameter", path.display(), i + 1))
        })?;
        theta.push(v);
    }
    Ok(theta)
}

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Key-value rendering of a detection report; one `grid` line per (j, t).
pub fn render_report(r: &EstimateReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("n={}\n", r.n));
    out.push_str(&format!("kappa={}\n", r.kappa));
    out.push_str(&format!("m_max={}\n", r.params.m_max));
    out.push_str(&format!("l_max={}\n", r.params.l_max));
    out.push_str(&format!("eta={}\n", r.eta));
    out.push_str(&format!("theta_hat={}\n", join(r.theta_hat.iter())));
    for g in &r.grids {
        out.push_str(&format!(
            "grid j={} t={} gamma={} candidates={}\n",
            g.j,
            g.t,
            g.gamma,
            join(g.candidates.iter())
        ));
    }
    out
}

pub fn write_report(path: &Path, r: &EstimateReport) -> Result<()> {
    fs::write(path, render_report(r))?;
    Ok(())
}

/// One experiment CSV row: a single (n, run, k) cell. Failed runs keep
/// their identity columns and carry the failure kind in `status`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub n: usize,
    pub run: u64,
    pub k: usize,
    pub theta_true: f64,
    pub theta_hat: Option<f64>,
    pub abs_error: Option<f64>,
    pub total_error: Option<f64>,
    pub status: String,
}

pub const EXPERIMENT_CSV_HEADER: &str = "n,run,k,theta_true,theta_hat,abs_error,total_error,status";

pub fn render_experiment_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(EXPERIMENT_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let opt = |v: &Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n,
            r.run,
            r.k,
            r.theta_true,
            opt(&r.theta_hat),
            opt(&r.abs_error),
            opt(&r.total_error),
            r.status
        ));
    }
    out
}

pub fn write_experiment_csv(path: &Path, rows: &[ExperimentRow]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(render_experiment_csv(rows).as_bytes())?;
    Ok(())
}
