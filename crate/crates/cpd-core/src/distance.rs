// SPDX-License-Identifier: MIT OR Apache-2.0

//! Empirical distributional distance between sequences, plus the two
//! operators built on it: the intra-window score `Delta` and the
//! single-change-point estimator `Phi`.
//!
//! Every stratum contribution is computed from exact integer counts as
//! `sum_B |c1(B)*w2 - c2(B)*w1| / (w1*w2)` where `w_i` is the window count
//! of sequence `i`. The integer sum is bounded by `2*w1*w2 < 2^53`, so it is
//! exact in `u64` and converts to `f64` without rounding; the division and
//! the weighted accumulation (m ascending, l ascending) are the only
//! floating-point steps. The brute-force oracle evaluates the same
//! expression in the same order, so the two paths agree bit for bit.

use std::collections::HashMap;

use crate::frequency::{build_frequency_table, quantize_slice, CellId};
use crate::{Error, Result, Scalar};

/// Truncation depths for the double sum over strata. The weight sequences
/// are fixed at `w_j = 1/(j(j+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistanceParams {
    pub m_max: u32,
    pub l_max: u32,
}

impl DistanceParams {
    pub fn new(m_max: u32, l_max: u32) -> Result<Self> {
        if m_max == 0 || l_max == 0 {
            return Err(Error::InvalidInput("depths must satisfy m_max >= 1 and l_max >= 1".into()));
        }
        Ok(Self { m_max, l_max })
    }

    /// `w_j = 1/(j(j+1))`, summable with total 1 over all j >= 1.
    pub fn weight(j: u32) -> f64 {
        let j = j as f64;
        1.0 / (j * (j + 1.0))
    }
}

/// A process whose cell probabilities are analytically known, for the
/// sequence-to-process form of the distance.
pub trait ProcessOracle {
    fn cell_probability(&self, cell: &CellId) -> Result<f64>;

    /// Total probability mass of one stratum; 1 for a proper distribution.
    fn stratum_total(&self, _m: u32, _l: u32) -> Result<f64> {
        Ok(1.0)
    }
}

fn check_finite<F: Scalar>(x: &[F]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Empty);
    }
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

fn window_count(n: usize, m: usize) -> u64 {
    if n >= m {
        (n - m + 1) as u64
    } else {
        0
    }
}

/// One stratum of the pairwise distance from exact integer counts.
///
/// `t_int = sum_B |c1*w2 - c2*w1|`; when one side has no windows its
/// frequencies are identically zero and the other side's frequencies sum
/// to one, giving a contribution of exactly 1.
fn stratum_term(t_int: u64, w1: u64, w2: u64) -> f64 {
    if w1 > 0 && w2 > 0 {
        t_int as f64 / (w1 as f64 * w2 as f64)
    } else if w1 == 0 && w2 == 0 {
        0.0
    } else {
        1.0
    }
}

/// Dense m-gram identifiers over a symbol sequence, extended from the
/// identifiers of the (m-1)-grams. Ids are assigned in order of first
/// occurrence; two windows share an id iff their coordinate tuples match,
/// so counting by id is exact (no hash collisions can merge cells).
fn extend_gram_ids(prev: &[u32], syms: &[i64], m: usize) -> (Vec<u32>, usize) {
    let n = syms.len();
    if n < m {
        return (Vec::new(), 0);
    }
    let count = n - m + 1;
    let mut ids = Vec::with_capacity(count);
    if m == 1 {
        let mut map: HashMap<i64, u32> = HashMap::new();
        for &s in syms {
            let next = map.len() as u32;
            ids.push(*map.entry(s).or_insert(next));
        }
        let n_ids = map.len();
        (ids, n_ids)
    } else {
        let mut map: HashMap<(u32, i64), u32> = HashMap::new();
        for i in 0..count {
            let key = (prev[i], syms[i + m - 1]);
            let next = map.len() as u32;
            ids.push(*map.entry(key).or_insert(next));
        }
        let n_ids = map.len();
        (ids, n_ids)
    }
}

/// Shared-id variant for a pair of sequences: both are mapped through one
/// id space so equal cells in `x1` and `x2` receive equal ids.
struct PairGrams {
    ids1: Vec<u32>,
    ids2: Vec<u32>,
    num_ids: usize,
}

fn extend_pair_grams(prev: Option<&PairGrams>, s1: &[i64], s2: &[i64], m: usize) -> PairGrams {
    let count1 = s1.len().saturating_sub(m - 1);
    let count2 = s2.len().saturating_sub(m - 1);
    let mut ids1 = Vec::with_capacity(count1);
    let mut ids2 = Vec::with_capacity(count2);
    let num_ids;
    if m == 1 {
        let mut map: HashMap<i64, u32> = HashMap::new();
        for &s in s1 {
            let next = map.len() as u32;
            ids1.push(*map.entry(s).or_insert(next));
        }
        for &s in s2 {
            let next = map.len() as u32;
            ids2.push(*map.entry(s).or_insert(next));
        }
        num_ids = map.len();
    } else {
        let prev = prev.expect("pair grams for m >= 2 need the previous level");
        let mut map: HashMap<(u32, i64), u32> = HashMap::new();
        for i in 0..count1 {
            let key = (prev.ids1[i], s1[i + m - 1]);
            let next = map.len() as u32;
            ids1.push(*map.entry(key).or_insert(next));
        }
        for i in 0..count2 {
            let key = (prev.ids2[i], s2[i + m - 1]);
            let next = map.len() as u32;
            ids2.push(*map.entry(key).or_insert(next));
        }
        num_ids = map.len();
    }
    PairGrams { ids1, ids2, num_ids }
}

/// Empirical distributional distance between two sequences.
pub fn empirical_distance<F: Scalar>(x1: &[F], x2: &[F], p: &DistanceParams) -> Result<f64> {
    check_finite(x1)?;
    check_finite(x2)?;
    let n1 = x1.len();
    let n2 = x2.len();
    let m_max = p.m_max as usize;
    let l_max = p.l_max as usize;

    // Exact integer cross-sums per stratum, indexed [(m-1)*l_max + (l-1)].
    // Computed l-outer so each quantization is done once; the order does not
    // matter because the sums are exact.
    let mut t_sums = vec![0u64; m_max * l_max];
    for l in 1..=p.l_max {
        let s1 = quantize_slice(x1, l);
        let s2 = quantize_slice(x2, l);
        let mut grams: Option<PairGrams> = None;
        for m in 1..=m_max {
            if n1 < m && n2 < m {
                break;
            }
            let g = extend_pair_grams(grams.as_ref(), &s1, &s2, m);
            let w1 = window_count(n1, m);
            let w2 = window_count(n2, m);
            if w1 > 0 && w2 > 0 {
                let mut c1 = vec![0u64; g.num_ids];
                let mut c2 = vec![0u64; g.num_ids];
                for &id in &g.ids1 {
                    c1[id as usize] += 1;
                }
                for &id in &g.ids2 {
                    c2[id as usize] += 1;
                }
                let mut t_int = 0u64;
                for id in 0..g.num_ids {
                    t_int += (c1[id] * w2).abs_diff(c2[id] * w1);
                }
                t_sums[(m - 1) * l_max + (l as usize - 1)] = t_int;
            }
            grams = Some(g);
        }
    }

    // Canonical accumulation order: m ascending, l ascending.
    let mut total = 0.0;
    for m in 1..=p.m_max {
        let wm = DistanceParams::weight(m);
        let w1 = window_count(n1, m as usize);
        let w2 = window_count(n2, m as usize);
        for l in 1..=p.l_max {
            let wl = DistanceParams::weight(l);
            let t_int = t_sums[(m as usize - 1) * l_max + (l as usize - 1)];
            total += wm * wl * stratum_term(t_int, w1, w2);
        }
    }
    Ok(total)
}

/// Empirical distance between a sequence and an analytically known process.
///
/// Unoccupied cells contribute `|0 - rho(B)| = rho(B)`; their total is the
/// stratum mass minus the mass of the occupied cells, which is exact for
/// product-form oracles.
pub fn distance_to_process<F: Scalar>(
    x: &[F],
    rho: &dyn ProcessOracle,
    p: &DistanceParams,
) -> Result<f64> {
    check_finite(x)?;
    let mut total = 0.0;
    for m in 1..=p.m_max {
        let wm = DistanceParams::weight(m);
        for l in 1..=p.l_max {
            let wl = DistanceParams::weight(l);
            let table = build_frequency_table(x, m, l)?;
            let stratum = if table.window_count() == 0 {
                // No windows: nu is identically zero and the whole stratum
                // mass is unmatched.
                rho.stratum_total(m, l)?
            } else {
                let mut occupied_mass = 0.0;
                let mut sum = 0.0;
                for (coords, _) in table.iter() {
                    let cell = CellId::new(m, l, coords.to_vec())?;
                    let prob = rho.cell_probability(&cell)?;
                    occupied_mass += prob;
                    sum += (table.nu(coords) - prob).abs();
                }
                sum + (rho.stratum_total(m, l)? - occupied_mass)
            };
            total += wm * wl * stratum;
        }
    }
    Ok(total)
}

/// Intra-window score: the distance between the two halves of `X_{a..b}`
/// (one-based inclusive). The midpoint sample belongs to both halves when
/// the window length is odd.
pub fn score_delta<F: Scalar>(x: &[F], a: usize, b: usize, p: &DistanceParams) -> Result<f64> {
    let n = x.len();
    if a < 1 || b > n {
        return Err(Error::InvalidInput(format!(
            "window ({a}, {b}) out of range for a series of length {n}"
        )));
    }
    if a >= b {
        return Err(Error::DegenerateWindow);
    }
    let mid_left = (a + b) / 2;
    let mid_right = a + b - mid_left; // ceil((a+b)/2)
    empirical_distance(&x[a - 1..mid_left], &x[mid_right - 1..b], p)
}

/// Packed (left count, right count) pair multiset with O(1) updates and
/// iteration over active pairs only.
struct PairMultiset {
    entries: Vec<(u64, u32)>,
    index: HashMap<u64, u32>,
}

#[inline]
fn pack(cl: u32, cr: u32) -> u64 {
    ((cl as u64) << 32) | cr as u64
}

impl PairMultiset {
    fn new() -> Self {
        Self { entries: Vec::new(), index: HashMap::new() }
    }

    fn inc(&mut self, pair: u64) {
        if pair == 0 {
            return;
        }
        match self.index.get(&pair) {
            Some(&pos) => self.entries[pos as usize].1 += 1,
            None => {
                self.index.insert(pair, self.entries.len() as u32);
                self.entries.push((pair, 1));
            }
        }
    }

    fn dec(&mut self, pair: u64) {
        if pair == 0 {
            return;
        }
        let pos = *self.index.get(&pair).expect("pair must be present") as usize;
        self.entries[pos].1 -= 1;
        if self.entries[pos].1 == 0 {
            self.entries.swap_remove(pos);
            self.index.remove(&pair);
            if pos < self.entries.len() {
                self.index.insert(self.entries[pos].0, pos as u32);
            }
        }
    }

    fn shift(&mut self, old: u64, new: u64) {
        if old != new {
            self.dec(old);
            self.inc(new);
        }
    }
}

/// Sweeps one stratum over every split position, adding its weighted
/// contribution to `scores[ti]` for the split at `t_rel = t0 + ti`.
///
/// At split `t_rel`, the left operand is `w[..t_rel]` and the right is
/// `w[t_rel..]`; advancing the split adds one left window and removes one
/// right window, so the pair multiset is maintained in O(1) per step.
#[allow(clippy::too_many_arguments)]
fn sweep_stratum(
    ids: &[u32],
    num_ids: usize,
    m: usize,
    l: u32,
    t0: usize,
    t1: usize,
    len: usize,
    scores: &mut [f64],
) {
    let wm = DistanceParams::weight(m as u32);
    let wl = DistanceParams::weight(l);
    let mut cl = vec![0u32; num_ids];
    let mut cr = vec![0u32; num_ids];
    // Left windows start in 0..=t0-m, right windows in t0..=len-m.
    for &id in &ids[..=t0 - m] {
        cl[id as usize] += 1;
    }
    for &id in &ids[t0..] {
        cr[id as usize] += 1;
    }
    let mut pairs = PairMultiset::new();
    for id in 0..num_ids {
        pairs.inc(pack(cl[id], cr[id]));
    }
    for ti in 0..=(t1 - t0) {
        let t_rel = t0 + ti;
        if ti > 0 {
            // New left window ends at t_rel - 1; the right window starting
            // at the previous split is no longer inside the right operand.
            let id_a = ids[t_rel - m] as usize;
            let old = pack(cl[id_a], cr[id_a]);
            cl[id_a] += 1;
            pairs.shift(old, pack(cl[id_a], cr[id_a]));

            let id_b = ids[t_rel - 1] as usize;
            let old = pack(cl[id_b], cr[id_b]);
            cr[id_b] -= 1;
            pairs.shift(old, pack(cl[id_b], cr[id_b]));
        }
        let w_left = (t_rel + 1 - m) as u64;
        let w_right = (len - t_rel - m + 1) as u64;
        let mut t_int = 0u64;
        for &(pair, mult) in &pairs.entries {
            let p_cnt = pair >> 32;
            let q_cnt = pair & 0xffff_ffff;
            t_int += mult as u64 * (p_cnt * w_right).abs_diff(q_cnt * w_left);
        }
        scores[ti] += wm * wl * stratum_term(t_int, w_left, w_right);
    }
}

/// Scores every split position `t_rel` in `t0..=t1` of the window `w`,
/// returning the same values as `empirical_distance` over the two operands
/// for each split (bit-identical, strata accumulated m-outer l-inner).
fn phi_scan<F: Scalar>(w: &[F], t0: usize, t1: usize, p: &DistanceParams) -> Vec<f64> {
    let len = w.len();
    let mut scores = vec![0.0f64; t1 - t0 + 1];
    let syms: Vec<Vec<i64>> = (1..=p.l_max).map(|l| quantize_slice(w, l)).collect();
    let mut prev: Vec<Vec<u32>> = vec![Vec::new(); p.l_max as usize];
    for m in 1..=p.m_max as usize {
        if len < m {
            break;
        }
        for li in 0..p.l_max as usize {
            let (ids, num_ids) = extend_gram_ids(&prev[li], &syms[li], m);
            sweep_stratum(&ids, num_ids, m, li as u32 + 1, t0, t1, len, &mut scores);
            prev[li] = ids;
        }
    }
    scores
}

/// Single-change-point estimator: the argmax over split positions
/// `t in a..b` (one-based) of the distance between the extended left part
/// `X_{clip(a-na)..t-1}` and the right part `X_{t..clip(b+na)}`; the
/// returned index is the first sample attributed to the right part. Splits
/// whose operands would hold fewer than `max(2, m_max)` samples are
/// inadmissible; ties break to the smallest `t`.
pub fn estimate_single<F: Scalar>(
    x: &[F],
    a: usize,
    b: usize,
    alpha: f64,
    p: &DistanceParams,
) -> Result<usize> {
    check_finite(x)?;
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
    let t_lo = a.max(lo + margin);
    let t_hi = b.min((hi + 1).saturating_sub(margin));
    if t_lo > t_hi {
        return Err(Error::DegenerateWindow);
    }
    let w = &x[lo - 1..hi];
    let scores = phi_scan(w, t_lo - lo, t_hi - lo, p);
    let mut best = 0usize;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(t_lo + best)
}
