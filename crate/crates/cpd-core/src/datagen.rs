// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic stationary ergodic data: the rotation process (a deterministic
//! irrational rotation on the circle selecting between two overlapping
//! uniforms), random change point placement, and multi-segment sequence
//! composition with ground truth.
//!
//! All generation is driven by `ChaCha12` streams seeded from a master seed
//! through [`derive_seed`], so runs and segments are reproducible bit for
//! bit and independently re-generatable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::changepoint::ChangePointTruth;
use crate::frequency::Series;
use crate::{Error, Result};

/// Parameters of one rotation process.
///
/// `alpha` stands in for an irrational rotation step; a full-precision
/// double with a long mantissa is the fidelity bound of the simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationProcessSpec {
    pub alpha: f64,
    /// Bounds of the uniform drawn when the phase is <= 0.5.
    pub u1: (f64, f64),
    /// Bounds of the uniform drawn when the phase is > 0.5.
    pub u2: (f64, f64),
    pub seed: u64,
}

impl RotationProcessSpec {
    pub fn new(alpha: f64, u1: (f64, f64), u2: (f64, f64), seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidInput("rotation step must lie in (0, 1)".into()));
        }
        if !(u1.0 < u1.1) || !(u2.0 < u2.1) {
            return Err(Error::InvalidInput("uniform intervals require low < high".into()));
        }
        Ok(Self { alpha, u1, u2, seed })
    }
}

/// Splitmix64-style seed derivation: child stream `tag` of `master`.
/// Changing one child's draws never perturbs any other stream.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    let mut z = master ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The phase trajectory `r_i = r_{i-1} + alpha mod 1` for `i = 1..=m`.
pub fn rotation_orbit(alpha: f64, r0: f64, m: usize) -> Vec<f64> {
    let mut r = r0;
    (0..m)
        .map(|_| {
            r = (r + alpha) % 1.0;
            r
        })
        .collect()
}

fn uniform_draw(rng: &mut ChaCha12Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Draws `m` samples of the rotation process: the phase starts uniform on
/// `[0, 1]` and advances deterministically; at every step one value is
/// drawn from each uniform and the phase selects which is emitted.
pub fn rotation_sample(spec: &RotationProcessSpec, m: usize) -> Result<Series<f64>> {
    if m == 0 {
        return Err(Error::Empty);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let r0: f64 = rng.random();
    let mut r = r0;
    let mut samples = Vec::with_capacity(m);
    for _ in 0..m {
        r = (r + spec.alpha) % 1.0;
        // Both candidate values are drawn so the stream advances the same
        // way regardless of the phase; the unused one is discarded.
        let y1 = uniform_draw(&mut rng, spec.u1);
        let y2 = uniform_draw(&mut rng, spec.u2);
        samples.push(if r <= 0.5 { y1 } else { y2 });
    }
    Series::new(samples)
}

/// Draws `kappa` ascending change point parameters in (0, 1) with every
/// consecutive gap (endpoints included) at least `lambda_min`, by rejection
/// sampling of sorted uniforms.
pub fn random_changepoints(kappa: usize, lambda_min: f64, seed: u64) -> Result<ChangePointTruth> {
    if kappa == 0 {
        return Err(Error::InvalidInput("kappa must be >= 1".into()));
    }
    if !(lambda_min > 0.0) {
        return Err(Error::InvalidInput("lambda_min must be positive".into()));
    }
    let slack = 1.0 - (kappa + 1) as f64 * lambda_min;
    if slack < 0.0 || (slack == 0.0 && kappa > 1) {
        return Err(Error::InvalidInput(format!(
            "infeasible: {} segments of minimum length {lambda_min} leave no interior room",
            kappa + 1
        )));
    }
    if slack == 0.0 {
        // kappa = 1 with lambda_min = 0.5: the single feasible placement.
        return ChangePointTruth::new(vec![lambda_min]);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    const MAX_ATTEMPTS: usize = 1_000_000;
    for _ in 0..MAX_ATTEMPTS {
        let mut theta: Vec<f64> = (0..kappa).map(|_| rng.random::<f64>()).collect();
        theta.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prev = 0.0;
        let mut ok = true;
        for &t in theta.iter().chain(std::iter::once(&1.0)) {
            if t - prev < lambda_min {
                ok = false;
                break;
            }
            prev = t;
        }
        if ok {
            return ChangePointTruth::new(theta);
        }
    }
    Err(Error::InvalidInput(
        "rejection sampling failed; (kappa, lambda_min) leaves almost no feasible room".into(),
    ))
}

/// A composed sequence together with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSequence {
    pub series: Series<f64>,
    pub truth: ChangePointTruth,
    /// Rotation step of the process generating each segment.
    pub segment_alphas: Vec<f64>,
}

/// Concatenates `kappa + 1` rotation process segments. Segment `k` covers
/// samples `floor(n*theta_{k-1})+1 ..= floor(n*theta_k)` (one-based), so the
/// rounding residue lands in the final segment and the total length is
/// exactly `n`. Each segment draws from its own child stream of `seed`.
pub fn compose_sequence(
    n: usize,
    truth: &ChangePointTruth,
    specs: &[RotationProcessSpec],
    seed: u64,
) -> Result<LabeledSequence> {
    let kappa = truth.kappa();
    if specs.len() != kappa + 1 {
        return Err(Error::InvalidInput(format!(
            "{} change points require {} process specs, got {}",
            kappa,
            kappa + 1,
            specs.len()
        )));
    }
    for (k, pair) in specs.windows(2).enumerate() {
        if pair[0].alpha == pair[1].alpha {
            return Err(Error::InvalidInput(format!(
                "segments {} and {} share the same rotation step; no change at their boundary",
                k + 1,
                k + 2
            )));
        }
    }
    let mut cuts = truth.change_indices(n);
    cuts.push(n);
    if cuts[0] == 0 || cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("n too small for the given change points".into()));
    }
    let mut samples = Vec::with_capacity(n);
    let mut start = 0usize;
    for (k, (&cut, spec)) in cuts.iter().zip(specs).enumerate() {
        let len = cut - start;
        let mut seg_spec = *spec;
        seg_spec.seed = derive_seed(seed, k as u64);
        samples.extend(rotation_sample(&seg_spec, len)?.into_vec());
        start = cut;
    }
    Ok(LabeledSequence {
        series: Series::new(samples)?,
        truth: truth.clone(),
        segment_alphas: specs.iter().map(|s| s.alpha).collect(),
    })
}

/// The four rotation steps of the reference experiment; "irrational" steps
/// simulated with long mantissae.
pub const DEFAULT_ALPHAS: [f64; 4] = [
    0.125_367_412_952_846_23,
    0.143_856_129_473_652_84,
    0.162_958_412_036_578_93,
    0.181_654_329_876_412_57,
];

/// The two overlapping uniforms of the reference experiment.
pub const DEFAULT_U1: (f64, f64) = (0.0, 0.7);
pub const DEFAULT_U2: (f64, f64) = (0.3, 1.0);
