// SPDX-License-Identifier: MIT OR Apache-2.0

//! Slow, transparent reference implementations used as ground truth in
//! equivalence tests. Nothing here shares counting or scanning code with
//! the fast paths in `frequency` and `distance`; the only thing both sides
//! have in common is the arithmetic form of a stratum contribution,
//! `sum_B |c1*w2 - c2*w1| / (w1*w2)`, which fixes the floating-point
//! rounding so that agreement can be checked exactly.

use std::collections::BTreeMap;

use crate::distance::{DistanceParams, ProcessOracle};
use crate::frequency::CellId;
use crate::{Error, Result, Scalar};

fn naive_counts<F: Scalar>(x: &[F], m: usize, l: u32) -> BTreeMap<Vec<i64>, u64> {
    let mut counts = BTreeMap::new();
    if x.len() < m {
        return counts;
    }
    let scale = F::from(2.0f64).unwrap().powi(l as i32);
    for i in 0..=x.len() - m {
        let key: Vec<i64> = x[i..i + m]
            .iter()
            .map(|&v| (v * scale).floor().to_i64().expect("coordinate overflow"))
            .collect();
        *counts.entry(key).or_insert(0) += 1;
    }
    counts
}

/// Direct nested-loop evaluation of the pairwise empirical distance.
/// Intended for small inputs only.
pub fn brute_force_distance<F: Scalar>(x1: &[F], x2: &[F], m_max: u32, l_max: u32) -> f64 {
    let mut total = 0.0;
    for m in 1..=m_max {
        let wm = 1.0 / (m as f64 * (m as f64 + 1.0));
        let w1 = if x1.len() >= m as usize { (x1.len() - m as usize + 1) as u64 } else { 0 };
        let w2 = if x2.len() >= m as usize { (x2.len() - m as usize + 1) as u64 } else { 0 };
        for l in 1..=l_max {
            let wl = 1.0 / (l as f64 * (l as f64 + 1.0));
            let term = if w1 > 0 && w2 > 0 {
                let c1 = naive_counts(x1, m as usize, l);
                let c2 = naive_counts(x2, m as usize, l);
                let mut keys: Vec<&Vec<i64>> = c1.keys().chain(c2.keys()).collect();
                keys.sort();
                keys.dedup();
                let mut t_int = 0u64;
                for key in keys {
                    let a = c1.get(key).copied().unwrap_or(0);
                    let b = c2.get(key).copied().unwrap_or(0);
                    t_int += (a * w2).abs_diff(b * w1);
                }
                t_int as f64 / (w1 as f64 * w2 as f64)
            } else if w1 == 0 && w2 == 0 {
                0.0
            } else {
                1.0
            };
            total += wm * wl * term;
        }
    }
    total
}

/// Exhaustive scan for the single-change-point estimator, re-evaluating the
/// brute-force distance at every split. Same window clipping, admissibility
/// margin and smallest-index tie rule as the fast path.
pub fn brute_force_phi<F: Scalar>(
    x: &[F],
    a: usize,
    b: usize,
    alpha: f64,
    p: &DistanceParams,
) -> Result<usize> {
    let n = x.len();
    if a < 1 || b < a || b > n {
        return Err(Error::InvalidInput(format!(
            "window ({a}, {b}) out of range for a series of length {n}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput("alpha must lie in (0, 1)".into()));
    }
    let ext = (n as f64 * alpha).floor() as usize;
    let lo = a.saturating_sub(ext).max(1);
    let hi = (b + ext).min(n);
    let margin = (p.m_max as usize).max(2);
    let mut best: Option<(usize, f64)> = None;
    for t in a..=b {
        if t < lo + margin || hi + 1 < t + margin {
            continue;
        }
        let left = &x[lo - 1..t - 1];
        let right = &x[t - 1..hi];
        let score = brute_force_distance(left, right, p.m_max, p.l_max);
        match best {
            Some((_, s)) if score <= s => {}
            _ => best = Some((t, score)),
        }
    }
    best.map(|(t, _)| t).ok_or(Error::DegenerateWindow)
}

/// An i.i.d. process with a piecewise-uniform marginal density; cell
/// probabilities are products of per-coordinate interval masses.
#[derive(Debug, Clone)]
pub struct IidUniformOracle {
    /// (lo, hi, density) pieces; the density integrates to 1.
    pieces: Vec<(f64, f64, f64)>,
    /// Strata with l above this are reported unsupported, when set.
    max_level: Option<u32>,
}

impl IidUniformOracle {
    pub fn uniform01() -> Self {
        Self::uniform(0.0, 1.0).unwrap()
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidInput("uniform interval requires lo < hi".into()));
        }
        Ok(Self { pieces: vec![(lo, hi, 1.0 / (hi - lo))], max_level: None })
    }

    pub fn piecewise(pieces: Vec<(f64, f64, f64)>) -> Result<Self> {
        let mut mass = 0.0;
        for &(lo, hi, d) in &pieces {
            if !(lo < hi) || !(d >= 0.0) {
                return Err(Error::InvalidInput("bad density piece".into()));
            }
            mass += (hi - lo) * d;
        }
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("density integrates to {mass}, not 1")));
        }
        Ok(Self { pieces, max_level: None })
    }

    pub fn with_max_level(mut self, max_level: u32) -> Self {
        self.max_level = Some(max_level);
        self
    }

    /// Mass of the marginal density on `[lo, hi)`.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        let mut mass = 0.0;
        for &(plo, phi, d) in &self.pieces {
            let left = lo.max(plo);
            let right = hi.min(phi);
            if right > left {
                mass += (right - left) * d;
            }
        }
        mass
    }
}

impl ProcessOracle for IidUniformOracle {
    fn cell_probability(&self, cell: &CellId) -> Result<f64> {
        if let Some(cap) = self.max_level {
            if cell.l > cap {
                return Err(Error::UnsupportedProcess { m: cell.m, l: cell.l });
            }
        }
        let width = (2.0f64).powi(-(cell.l as i32));
        let mut prob = 1.0;
        for &c in &cell.coords {
            let lo = c as f64 * width;
            prob *= self.interval_mass(lo, lo + width);
        }
        Ok(prob)
    }
}

/// Closed-form cell probability of an i.i.d. product-form process.
pub fn iid_cell_probability(oracle: &IidUniformOracle, cell: &CellId) -> Result<f64> {
    oracle.cell_probability(cell)
}
