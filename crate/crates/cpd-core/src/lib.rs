// SPDX-License-Identifier: MIT OR Apache-2.0

//! Offline, nonparametric multiple change point estimation for real-valued
//! time series generated by unknown stationary ergodic processes.
//!
//! The estimator is built on empirical estimates of the distributional
//! distance: a weighted sum, over multi-resolution cube partitions of
//! `R^m`, of absolute differences in pattern frequencies. No independence,
//! mixing or parametric assumptions are made about the data; the number of
//! change points is assumed known.
//!
//! Modules:
//! - [`frequency`]: multi-resolution quantization and sparse m-gram counting.
//! - [`distance`]: the empirical distributional distance, the score function
//!   `Delta` and the single-change-point estimator `Phi`.
//! - [`changepoint`]: the multiple change point estimator (grids, performance
//!   scores, weighted combination of candidates).
//! - [`datagen`]: synthetic stationary ergodic data (rotation processes).
//! - [`oracle`]: slow reference implementations used as test ground truth.

#![forbid(unsafe_code)]

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub mod changepoint;
pub mod datagen;
pub mod distance;
pub mod frequency;
pub mod oracle;

/// Scalar sample type the kernels are generic over.
///
/// Quantization is the only place sample values are inspected; everything
/// downstream of it works on integer cell coordinates and counts, so
/// distances are always reported as `f64` regardless of `F`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + core::fmt::Debug + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + core::fmt::Debug + Send + Sync + 'static
{
}

/// Concrete series type used by the CLI and the experiment harness.
pub type TimeSeries = frequency::Series<f64>;
/// Single-precision alias; the kernels are exact in the counts either way.
pub type TimeSeries32 = frequency::Series<f32>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("series must contain at least one sample")]
    Empty,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("all samples identical; minimum separation is undefined")]
    DegenerateValues,
    #[error("window too short for the requested operation")]
    DegenerateWindow,
    #[error("process oracle does not cover stratum (m={m}, l={l})")]
    UnsupportedProcess { m: u32, l: u32 },
    #[error("grid too fine: fewer than one sample per segment")]
    GridTooFine,
    #[error("no grid produced a positive performance score (eta = 0)")]
    NoSignal,
}

pub type Result<T> = std::result::Result<T, Error>;
