// SPDX-License-Identifier: MIT OR Apache-2.0

//! Multi-resolution quantization and sparse m-gram frequency counting.
//!
//! The real line is partitioned, at resolution level `l`, into half-open
//! cells `[c * 2^-l, (c + 1) * 2^-l)` anchored at the origin; an m-gram of
//! samples quantizes to a cell of `R^m` identified by its `m` signed integer
//! coordinates. Only occupied cells are ever materialized.

use std::collections::BTreeMap;
use std::ops::Deref;

use crate::{Error, Result, Scalar};

/// An ordered sequence of finite real-valued samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<F> {
    samples: Vec<F>,
}

impl<F: Scalar> Series<F> {
    /// Validates that the sample vector is nonempty and every value finite.
    pub fn new(samples: Vec<F>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[F] {
        &self.samples
    }

    pub fn into_vec(self) -> Vec<F> {
        self.samples
    }

    /// One-based inclusive subsequence `X_{a..b}`.
    pub fn range1(&self, a: usize, b: usize) -> &[F] {
        &self.samples[a - 1..b]
    }
}

impl<F> Deref for Series<F> {
    type Target = [F];

    fn deref(&self) -> &[F] {
        &self.samples
    }
}

/// A quantized m-gram: the cell of `R^m` at resolution `l` whose coordinate
/// along each axis is the signed integer `c` with the sample in
/// `[c * 2^-l, (c + 1) * 2^-l)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub m: u32,
    pub l: u32,
    pub coords: Vec<i64>,
}

impl CellId {
    pub fn new(m: u32, l: u32, coords: Vec<i64>) -> Result<Self> {
        if m == 0 || l == 0 {
            return Err(Error::InvalidInput("cell requires m >= 1 and l >= 1".into()));
        }
        if coords.len() != m as usize {
            return Err(Error::InvalidInput(format!(
                "cell of dimension {m} given {} coordinates",
                coords.len()
            )));
        }
        Ok(Self { m, l, coords })
    }
}

/// Returns the coordinate `c` of the level-`l` cell containing `x`,
/// i.e. `floor(x * 2^l)`.
pub fn quantize_value<F: Scalar>(x: F, l: u32) -> Result<i64> {
    if !x.is_finite() {
        return Err(Error::InvalidInput("cannot quantize a non-finite value".into()));
    }
    if l == 0 {
        return Err(Error::InvalidInput("resolution level must be >= 1".into()));
    }
    let scale = F::from(2.0f64).unwrap().powi(l as i32);
    (x * scale)
        .floor()
        .to_i64()
        .ok_or_else(|| Error::InvalidInput("quantized coordinate overflows i64".into()))
}

/// Quantizes a whole slice at level `l`. Samples must already be finite.
pub(crate) fn quantize_slice<F: Scalar>(x: &[F], l: u32) -> Vec<i64> {
    let scale = F::from(2.0f64).unwrap().powi(l as i32);
    x.iter()
        .map(|&v| {
            (v * scale)
                .floor()
                .to_i64()
                .expect("quantized coordinate overflows i64")
        })
        .collect()
}

/// Sparse frequency counts over one `(m, l)` stratum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    pub m: u32,
    pub l: u32,
    counts: BTreeMap<Vec<i64>, u64>,
    window_count: u64,
}

impl FrequencyTable {
    pub fn window_count(&self) -> u64 {
        self.window_count
    }

    pub fn count(&self, coords: &[i64]) -> u64 {
        self.counts.get(coords).copied().unwrap_or(0)
    }

    /// Frequency of one cell: `count / (n - m + 1)`, or 0 when `n < m`.
    pub fn nu(&self, coords: &[i64]) -> f64 {
        if self.window_count == 0 {
            0.0
        } else {
            self.count(coords) as f64 / self.window_count as f64
        }
    }

    /// Occupied cells in ascending coordinate order.
    pub fn iter(&self) -> impl Iterator<Item = (&[i64], u64)> + '_ {
        self.counts.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn occupied(&self) -> usize {
        self.counts.len()
    }
}

/// Counts every quantized m-gram of `x` at resolution `l`.
///
/// When `n < m` there are no windows and the table is empty (the indicator
/// guard in the frequency definition).
pub fn build_frequency_table<F: Scalar>(x: &[F], m: u32, l: u32) -> Result<FrequencyTable> {
    if m == 0 || l == 0 {
        return Err(Error::InvalidInput("require m >= 1 and l >= 1".into()));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let n = x.len();
    let m_us = m as usize;
    let mut counts = BTreeMap::new();
    let mut window_count = 0u64;
    if n >= m_us {
        let symbols = quantize_slice(x, l);
        for w in symbols.windows(m_us) {
            *counts.entry(w.to_vec()).or_insert(0) += 1;
        }
        window_count = (n - m_us + 1) as u64;
    }
    Ok(FrequencyTable { m, l, counts, window_count })
}

/// The frequency with which `x` falls in `cell`.
pub fn nu<F: Scalar>(x: &[F], cell: &CellId) -> Result<f64> {
    let table = build_frequency_table(x, cell.m, cell.l)?;
    Ok(table.nu(&cell.coords))
}

/// Minimum gap between distinct values drawn from either sequence.
///
/// This is the finest scale at which refining the partition still separates
/// points; callers fall back to a configured resolution cap when every value
/// is identical.
pub fn min_separation<F: Scalar>(x1: &[F], x2: &[F]) -> Result<F> {
    let mut values: Vec<F> = Vec::with_capacity(x1.len() + x2.len());
    for (i, &v) in x1.iter().chain(x2.iter()).enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(i));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Empty);
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best: Option<F> = None;
    for w in values.windows(2) {
        let gap = w[1] - w[0];
        if gap > F::zero() {
            best = Some(match best {
                Some(b) if b <= gap => b,
                _ => gap,
            });
        }
    }
    best.ok_or(Error::DegenerateValues)
}

/// Default truncation depths: `m_max = max(1, floor(log2 n))` and
/// `l_max = min(cap, max(1, ceil(log2(1/s_min))))`.
pub fn default_depths(n: usize, s_min: f64, cap: u32) -> Result<(u32, u32)> {
    if n < 2 {
        return Err(Error::InvalidInput("default_depths requires n >= 2".into()));
    }
    if !(s_min > 0.0) || !s_min.is_finite() {
        return Err(Error::InvalidInput("s_min must be a positive finite real".into()));
    }
    if cap == 0 {
        return Err(Error::InvalidInput("resolution cap must be >= 1".into()));
    }
    let m_max = (n.ilog2()).max(1);
    let l_raw = (1.0 / s_min).log2().ceil();
    let l_max = if l_raw <= 1.0 {
        1
    } else if l_raw >= cap as f64 {
        cap
    } else {
        l_raw as u32
    };
    Ok((m_max, l_max))
}
