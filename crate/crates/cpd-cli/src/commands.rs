// SPDX-License-Identifier: MIT OR Apache-2.0

//! The three subcommands, exposed as library functions so the integration
//! tests can drive them without spawning processes.

use std::path::PathBuf;

use rayon::prelude::*;

use cpd_core::changepoint::{estimate_changepoints, ChangePointTruth, EstimateReport};
use cpd_core::datagen::{
    compose_sequence, derive_seed, random_changepoints, RotationProcessSpec,
};
use cpd_core::distance::DistanceParams;
use cpd_core::frequency::{default_depths, min_separation, Series};

use crate::io::{self, ExperimentRow, SeriesFormat};
use crate::{CliError, Result};

/// Builds the `kappa + 1` per-segment process specs by cycling through the
/// configured rotation steps.
fn segment_specs(
    alphas: &[f64],
    u1: (f64, f64),
    u2: (f64, f64),
    kappa: usize,
) -> Result<Vec<RotationProcessSpec>> {
    if alphas.is_empty() {
        return Err(CliError::Config("at least one rotation step is required".into()));
    }
    (0..=kappa)
        .map(|k| {
            RotationProcessSpec::new(alphas[k % alphas.len()], u1, u2, 0).map_err(Into::into)
        })
        .collect()
}

/// Distance depths for a stored series: defaults follow its length and the
/// finest value separation, capped at `l_cap`; explicit overrides win.
fn resolve_depths(
    x: &[f64],
    m_max: Option<u32>,
    l_max: Option<u32>,
    l_cap: u32,
) -> Result<DistanceParams> {
    // On all-identical values the resolution is moot (detection reports no
    // signal downstream anyway), so fall back to unit separation.
    let s_min = min_separation(x, x).unwrap_or(1.0);
    let (dm, dl) = default_depths(x.len().max(2), s_min, l_cap)?;
    DistanceParams::new(m_max.unwrap_or(dm), l_max.unwrap_or(dl)).map_err(Into::into)
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n: usize,
    pub kappa: usize,
    pub lambda_min: f64,
    pub alphas: Vec<f64>,
    pub u1: (f64, f64),
    pub u2: (f64, f64),
    pub seed: u64,
    pub out: PathBuf,
    pub truth: Option<PathBuf>,
    pub format: SeriesFormat,
}

/// Generates one labeled sequence and writes the series (and optionally the
/// ground truth) to disk.
pub fn cmd_synth(cfg: &SynthConfig) -> Result<ChangePointTruth> {
    let truth = random_changepoints(cfg.kappa, cfg.lambda_min, derive_seed(cfg.seed, 0))?;
    let specs = segment_specs(&cfg.alphas, cfg.u1, cfg.u2, cfg.kappa)?;
    let labeled = compose_sequence(cfg.n, &truth, &specs, derive_seed(cfg.seed, 1))?;
    io::write_series(&cfg.out, &labeled.series, cfg.format)?;
    if let Some(truth_path) = &cfg.truth {
        io::write_truth(truth_path, truth.theta())?;
    }
    Ok(truth)
}

#[derive(Debug, Clone)]
pub struct DetectConfig {
    pub input: PathBuf,
    pub kappa: usize,
    pub m_max: Option<u32>,
    pub l_max: Option<u32>,
    pub l_cap: u32,
    pub rescale: bool,
    pub format: SeriesFormat,
    pub out: Option<PathBuf>,
}

/// Runs detection on a stored series; the report goes to `out` when given,
/// and is returned either way.
pub fn cmd_detect(cfg: &DetectConfig) -> Result<EstimateReport> {
    let mut data = io::read_series(&cfg.input, cfg.format)?;
    if cfg.rescale {
        rescale_unit(&mut data);
    }
    let series = Series::new(data).map_err(|e| CliError::Parse(e.to_string()))?;
    let params = resolve_depths(&series, cfg.m_max, cfg.l_max, cfg.l_cap)?;
    let report = estimate_changepoints(&series, cfg.kappa, &params)?;
    if let Some(path) = &cfg.out {
        io::write_report(path, &report)?;
    }
    Ok(report)
}

/// Affine map of the sample range onto [0, 1]; constant input is left alone.
fn rescale_unit(data: &mut [f64]) {
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        let span = hi - lo;
        for v in data {
            *v = (*v - lo) / span;
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub ns: Vec<usize>,
    pub runs: u64,
    pub kappa: usize,
    pub lambda_min: f64,
    pub alphas: Vec<f64>,
    pub u1: (f64, f64),
    pub u2: (f64, f64),
    pub seed: u64,
    pub m_max: Option<u32>,
    pub l_max: Option<u32>,
    pub l_cap: u32,
    pub out: Option<PathBuf>,
}

/// One Monte Carlo cell: synthesize, detect, score. Detection failures are
/// reported in the row status instead of aborting the sweep.
fn run_cell(cfg: &ExperimentConfig, n: usize, n_index: usize, run: u64) -> Vec<ExperimentRow> {
    let cell = |status: &str, truth: &ChangePointTruth, hat: Option<&[f64]>| -> Vec<ExperimentRow> {
        let total = hat.map(|h| {
            h.iter().zip(truth.theta()).map(|(a, b)| (a - b).abs()).sum::<f64>()
        });
        truth
            .theta()
            .iter()
            .enumerate()
            .map(|(k, &t)| ExperimentRow {
                n,
                run,
                k: k + 1,
                theta_true: t,
                theta_hat: hat.map(|h| h[k]),
                abs_error: hat.map(|h| (h[k] - t).abs()),
                total_error: total,
                status: status.to_string(),
            })
            .collect()
    };

    // The cell seed depends on the run only, not on the sequence length:
    // every length sees the same ground truths and process streams, so
    // across-length comparisons are paired (common random numbers).
    let _ = n_index;
    let seed = derive_seed(cfg.seed, run);
    let truth = match random_changepoints(cfg.kappa, cfg.lambda_min, derive_seed(seed, 0)) {
        Ok(t) => t,
        Err(e) => {
            // Infeasibility is caught before the sweep; anything else here
            // is unexpected but still reported per-row.
            let placeholder = ChangePointTruth::new(
                (1..=cfg.kappa).map(|k| k as f64 / (cfg.kappa + 1) as f64).collect(),
            )
            .expect("uniform placeholder truth is valid");
            return cell(&format!("truth-error:{e}"), &placeholder, None);
        }
    };
    let outcome = segment_specs(&cfg.alphas, cfg.u1, cfg.u2, cfg.kappa)
        .and_then(|specs| {
            compose_sequence(n, &truth, &specs, derive_seed(seed, 1)).map_err(Into::into)
        })
        .and_then(|labeled| {
            let params = resolve_depths(&labeled.series, cfg.m_max, cfg.l_max, cfg.l_cap)?;
            estimate_changepoints(&labeled.series, cfg.kappa, &params).map_err(Into::into)
        });
    match outcome {
        Ok(report) => cell("ok", &truth, Some(&report.theta_hat)),
        Err(CliError::NoSignal) => cell("no-signal", &truth, None),
        Err(e) => cell(&format!("error:{e}"), &truth, None),
    }
}

/// Full sweep over `ns x runs`. Cells run in parallel; every cell derives
/// its own seed from the master seed, so the row set is independent of the
/// thread count. Rows come back sorted by (n, run, k).
pub fn cmd_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    if cfg.runs < 1 {
        return Err(CliError::Config("runs must be at least 1".into()));
    }
    if cfg.ns.is_empty() {
        return Err(CliError::Config("at least one sequence length is required".into()));
    }
    // Surface infeasible (kappa, lambda_min) as a config error up front.
    random_changepoints(cfg.kappa, cfg.lambda_min, 0)?;
    segment_specs(&cfg.alphas, cfg.u1, cfg.u2, cfg.kappa)?;

    let cells: Vec<(usize, usize, u64)> = cfg
        .ns
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| (0..cfg.runs).map(move |r| (n, i, r)))
        .collect();
    let mut rows: Vec<ExperimentRow> = cells
        .par_iter()
        .flat_map_iter(|&(n, i, r)| run_cell(cfg, n, i, r))
        .collect();
    rows.sort_by(|a, b| (a.n, a.run, a.k).cmp(&(b.n, b.run, b.k)));
    if let Some(path) = &cfg.out {
        io::write_experiment_csv(path, &rows)?;
    }
    Ok(rows)
}

/// Mean of per-run total errors for one sequence length, counting only
/// successful runs. Returns the mean and the number of runs it covers.
pub fn mean_total_error(rows: &[ExperimentRow], n: usize) -> (f64, usize) {
    let mut sum = 0.0;
    let mut count = 0usize;
    for row in rows.iter().filter(|r| r.n == n && r.k == 1) {
        if let Some(total) = row.total_error {
            sum += total;
            count += 1;
        }
    }
    if count == 0 {
        (f64::NAN, 0)
    } else {
        (sum / count as f64, count)
    }
}
