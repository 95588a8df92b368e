// SPDX-License-Identifier: MIT OR Apache-2.0

#![forbid(unsafe_code)]

//! Batch front end over the change-point detection library: synthesize
//! labeled sequences, run detection on stored series, and reproduce the
//! Monte Carlo experiment as CSV.
//!
//! Exit codes of the `cpd` binary: 0 success, 1 I/O failure, 2 parse error
//! (flags or input files), 3 infeasible configuration, 4 no detectable
//! signal in the input.

pub mod commands;
pub mod io;

use std::fmt;

/// Top-level failure kinds, each mapped to a stable process exit code.
#[derive(Debug)]
pub enum CliError {
    Io(std::io::Error),
    Parse(String),
    Config(String),
    NoSignal,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Config(_) => 3,
            CliError::NoSignal => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Parse(msg) => write!(f, "parse error: {msg}"),
            CliError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::NoSignal => {
                write!(f, "no signal: every grid scored zero; the series may be constant")
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<cpd_core::Error> for CliError {
    fn from(e: cpd_core::Error) -> Self {
        match e {
            cpd_core::Error::NoSignal => CliError::NoSignal,
            cpd_core::Error::NonFinite(_) | cpd_core::Error::Empty => {
                CliError::Parse(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
