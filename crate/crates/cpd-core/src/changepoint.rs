// SPDX-License-Identifier: MIT OR Apache-2.0

//! The multiple change point estimator: multi-resolution grids, per-segment
//! scores, grid performance scores, candidate estimates from the
//! single-change-point estimator, and the weighted final combination.
//!
//! For each iteration `j` the guess for a lower bound on the minimum
//! segment separation is `lambda_j = 2^-j`; each of the `kappa + 1` grids at
//! that scale has boundaries spaced `n * lambda_j / 3` apart with a
//! t-dependent starting offset. Grids that cannot certify `kappa` changes
//! receive a performance score of zero and drop out of the combination.

use crate::distance::{estimate_single, score_delta, DistanceParams};
use crate::{Error, Result, Scalar};

/// One `(j, t)` grid: evenly spaced integer boundaries over `[0, n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub j: u32,
    pub t: u32,
    /// Segment spacing as a fraction of n: `2^-j / 3`.
    pub alpha: f64,
    /// Iteration weight `w_j = 2^-j`.
    pub weight: f64,
    /// `b_i = floor(n * alpha * (i + 1/(t+1)))` for `i = 0..=3*2^j - 1`.
    pub boundaries: Vec<usize>,
}

impl GridSpec {
    pub fn segments(&self) -> usize {
        self.boundaries.len() - 1
    }
}

/// Ground-truth change point parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangePointTruth {
    theta: Vec<f64>,
}

impl ChangePointTruth {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidInput("need at least one change point".into()));
        }
        let mut prev = 0.0;
        for &t in &theta {
            if !(t > prev && t < 1.0) {
                return Err(Error::InvalidInput(
                    "change point parameters must be strictly increasing inside (0, 1)".into(),
                ));
            }
            prev = t;
        }
        Ok(Self { theta })
    }

    pub fn kappa(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Minimum consecutive gap, including the endpoints 0 and 1.
    pub fn lambda_min(&self) -> f64 {
        let mut min = f64::INFINITY;
        let mut prev = 0.0;
        for &t in self.theta.iter().chain(std::iter::once(&1.0)) {
            min = min.min(t - prev);
            prev = t;
        }
        min
    }

    /// Change point sample indices `floor(n * theta_k)`.
    pub fn change_indices(&self, n: usize) -> Vec<usize> {
        self.theta.iter().map(|&t| (n as f64 * t).floor() as usize).collect()
    }
}

/// Per-grid record kept in the final report.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRecord {
    pub j: u32,
    pub t: u32,
    pub gamma: f64,
    /// Candidate change point indices, ascending; empty when gamma = 0.
    pub candidates: Vec<usize>,
}

/// Output of the estimator: the combined estimates plus everything that
/// went into the combination.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub n: usize,
    pub kappa: usize,
    pub params: DistanceParams,
    /// Normalizer: the sum of all `w_j * gamma(t, j)`.
    pub eta: f64,
    /// Final estimates in (0, 1), ascending.
    pub theta_hat: Vec<f64>,
    pub grids: Vec<GridRecord>,
}

/// Boundaries of the `(j, t)` grid over a series of length `n`.
///
/// Computed in integer arithmetic: `b_i = floor(n*(i*(t+1) + 1) / (3*2^j*(t+1)))`,
/// which is exact where naive floating point rounds the wrong way.
pub fn grid_boundaries(n: usize, j: u32, t: u32) -> Result<GridSpec> {
    if j == 0 || t == 0 {
        return Err(Error::InvalidInput("grid requires j >= 1 and t >= 1".into()));
    }
    if j >= 62 || (n as u128) < 3 * (1u128 << j) {
        // n * alpha_j < 1: fewer than one sample per segment.
        return Err(Error::GridTooFine);
    }
    let pow = 1u128 << j;
    let tp1 = (t + 1) as u128;
    let denom = 3 * pow * tp1;
    let i_max = 3 * pow as u64 - 1; // floor(1/alpha - 1/(t+1)) for alpha = 2^-j/3
    let mut boundaries = Vec::with_capacity(i_max as usize + 1);
    for i in 0..=i_max {
        let num = n as u128 * (i as u128 * tp1 + 1);
        boundaries.push((num / denom) as usize);
    }
    Ok(GridSpec {
        j,
        t,
        alpha: (2.0f64).powi(-(j as i32)) / 3.0,
        weight: (2.0f64).powi(-(j as i32)),
        boundaries,
    })
}

/// Depths for a nested distance call, derived from the length of the
/// shorter operand rather than from the full series.
fn local_params(p: &DistanceParams, shorter_len: usize) -> DistanceParams {
    let m_cap = if shorter_len >= 2 { shorter_len.ilog2().max(1) } else { 1 };
    DistanceParams { m_max: p.m_max.min(m_cap), l_max: p.l_max }
}

/// Intra-segment score of every consecutive boundary pair of the grid.
/// Degenerate windows (including a leading boundary of zero) score 0.
pub fn segment_scores<F: Scalar>(x: &[F], g: &GridSpec, p: &DistanceParams) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(g.segments());
    for i in 1..g.boundaries.len() {
        let a = g.boundaries[i - 1];
        let b = g.boundaries[i];
        let score = if a >= 1 && b > a {
            let half = (b - a + 1) / 2;
            score_delta(x, a, b, &local_params(p, half.max(1))).unwrap_or(0.0)
        } else {
            0.0
        };
        out.push((i, score));
    }
    out
}

/// Grid performance score: for each of the three window-partition offsets,
/// the kappa-th largest intra-window score over non-overlapping three-segment
/// windows; the grid score is the minimum over offsets. Zero when any offset
/// yields fewer than kappa windows.
pub fn grid_gamma<F: Scalar>(x: &[F], g: &GridSpec, kappa: usize, p: &DistanceParams) -> f64 {
    let i_max = g.boundaries.len() - 1;
    let mut gamma = f64::INFINITY;
    for offset in 0..=2usize {
        let windows = (i_max - offset) / 3;
        if windows < kappa {
            return 0.0;
        }
        let mut scores = Vec::with_capacity(windows);
        for i in 1..=windows {
            let a = g.boundaries[offset + 3 * (i - 1)];
            let b = g.boundaries[offset + 3 * i];
            let score = if a >= 1 && b > a {
                let half = (b - a + 1) / 2;
                score_delta(x, a, b, &local_params(p, half.max(1))).unwrap_or(0.0)
            } else {
                0.0
            };
            scores.push(score);
        }
        scores.sort_by(|a, b| b.partial_cmp(a).unwrap());
        gamma = gamma.min(scores[kappa - 1]);
    }
    gamma
}

/// The full estimator. Iterates every `(j, t)` grid in a fixed ascending
/// order, so the floating-point accumulation of `eta` and the weighted sums
/// is bit-stable for identical inputs.
pub fn estimate_changepoints<F: Scalar>(
    x: &[F],
    kappa: usize,
    p: &DistanceParams,
) -> Result<EstimateReport> {
    let n = x.len();
    if kappa == 0 {
        return Err(Error::InvalidInput("kappa must be >= 1".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput("series too short".into()));
    }
    let j_max = n.ilog2();
    let mut grids: Vec<GridRecord> = Vec::new();
    let mut eta = 0.0;
    let mut weighted_sums = vec![0.0f64; kappa];

    for j in 1..=j_max {
        for t in 1..=(kappa as u32 + 1) {
            let grid = match grid_boundaries(n, j, t) {
                Ok(g) => g,
                Err(Error::GridTooFine) => {
                    grids.push(GridRecord { j, t, gamma: 0.0, candidates: Vec::new() });
                    continue;
                }
                Err(e) => return Err(e),
            };
            let mut record = GridRecord { j, t, gamma: 0.0, candidates: Vec::new() };
            if grid.segments() >= kappa {
                let gamma = grid_gamma(x, &grid, kappa, p);
                if gamma > 0.0 {
                    match grid_candidates(x, &grid, kappa, p) {
                        Some(candidates) => {
                            record.gamma = gamma;
                            record.candidates = candidates;
                            eta += grid.weight * gamma;
                            for (k, sum) in weighted_sums.iter_mut().enumerate() {
                                *sum += grid.weight * gamma * record.candidates[k] as f64;
                            }
                        }
                        // A selected segment too short for the estimator:
                        // the grid cannot certify its candidates.
                        None => record.gamma = 0.0,
                    }
                }
            }
            grids.push(record);
        }
    }

    if eta <= 0.0 {
        return Err(Error::NoSignal);
    }
    let theta_hat: Vec<f64> = weighted_sums.iter().map(|s| s / (n as f64 * eta)).collect();
    Ok(EstimateReport { n, kappa, params: *p, eta, theta_hat, grids })
}

/// Candidate change points of one grid: run the single-change-point
/// estimator in each of the kappa segments of highest score (ties to the
/// smaller segment index), then sort the results ascending.
fn grid_candidates<F: Scalar>(
    x: &[F],
    grid: &GridSpec,
    kappa: usize,
    p: &DistanceParams,
) -> Option<Vec<usize>> {
    let mut scored = segment_scores(x, grid, p);
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut candidates = Vec::with_capacity(kappa);
    for &(i, _) in scored.iter().take(kappa) {
        let a = grid.boundaries[i - 1].max(1);
        let b = grid.boundaries[i];
        let seg_len = b.saturating_sub(a) + 1;
        let lp = local_params(p, seg_len);
        match estimate_single(x, a, b, grid.alpha, &lp) {
            Ok(t) => candidates.push(t),
            Err(Error::DegenerateWindow) => return None,
            Err(_) => return None,
        }
    }
    candidates.sort_unstable();
    Some(candidates)
}

/// Sum of absolute estimation errors, `sum_k |theta_hat_k - theta_k|`.
pub fn error_rate(theta_hat: &[f64], truth: &ChangePointTruth) -> Result<f64> {
    if theta_hat.len() != truth.kappa() {
        return Err(Error::InvalidInput(format!(
            "estimate has {} change points, truth has {}",
            theta_hat.len(),
            truth.kappa()
        )));
    }
    Ok(theta_hat
        .iter()
        .zip(truth.theta())
        .map(|(a, b)| (a - b).abs())
        .sum())
}
