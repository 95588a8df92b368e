// SPDX-License-Identifier: MIT OR Apache-2.0

#![forbid(unsafe_code)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cpd_cli::commands::{
    cmd_detect, cmd_experiment, cmd_synth, DetectConfig, ExperimentConfig, SynthConfig,
};
use cpd_cli::io::{render_experiment_csv, render_report, SeriesFormat};
use cpd_cli::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Binary,
}

impl From<FormatArg> for SeriesFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => SeriesFormat::Text,
            FormatArg::Binary => SeriesFormat::Binary,
        }
    }
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected lo,hi — got {s:?}"));
    }
    let lo: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

/// Process parameters shared by the generating subcommands.
#[derive(Debug, Args)]
struct ProcessArgs {
    /// Number of change points.
    #[arg(long, default_value_t = 3)]
    kappa: usize,
    /// Minimum relative separation between consecutive change points.
    #[arg(long, default_value_t = 0.1)]
    lambda_min: f64,
    /// Rotation steps, one per segment, cycled if fewer than kappa+1.
    #[arg(
        long,
        value_delimiter = ',',
        default_values_t = cpd_core::datagen::DEFAULT_ALPHAS
    )]
    alphas: Vec<f64>,
    /// First uniform component as lo,hi.
    #[arg(long, value_parser = parse_pair, default_value = "0,0.7")]
    u1: (f64, f64),
    /// Second uniform component as lo,hi.
    #[arg(long, value_parser = parse_pair, default_value = "0.3,1")]
    u2: (f64, f64),
    /// Master seed; everything downstream derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Distance depth controls shared by the detecting subcommands.
#[derive(Debug, Args)]
struct DepthArgs {
    /// Longest pattern length considered; defaults to log2 of the series length.
    #[arg(long)]
    m_max: Option<u32>,
    /// Finest dyadic resolution; defaults from the smallest value gap, capped.
    #[arg(long)]
    l_max: Option<u32>,
    /// Upper bound applied to the derived resolution.
    #[arg(long, default_value_t = 20)]
    l_cap: u32,
}

#[derive(Debug, Parser)]
#[command(
    name = "cpd",
    about = "Offline nonparametric multiple change-point detection",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic sequence with known change points.
    Synth {
        /// Sequence length.
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        process: ProcessArgs,
        /// Series output path.
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth output path.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Locate change points in a stored series.
    Detect {
        /// Series input path.
        input: PathBuf,
        /// Number of change points to locate.
        #[arg(long)]
        kappa: usize,
        #[command(flatten)]
        depths: DepthArgs,
        /// Affinely map the sample range onto [0, 1] before detection.
        #[arg(long)]
        rescale: bool,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        /// Report output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo sweep over sequence lengths; emits CSV.
    Experiment {
        /// Sequence lengths to sweep.
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        /// Runs per length.
        #[arg(long, default_value_t = 50)]
        runs: u64,
        #[command(flatten)]
        process: ProcessArgs,
        #[command(flatten)]
        depths: DepthArgs,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { n, process, out, truth, format } => {
            cmd_synth(&SynthConfig {
                n,
                kappa: process.kappa,
                lambda_min: process.lambda_min,
                alphas: process.alphas,
                u1: process.u1,
                u2: process.u2,
                seed: process.seed,
                out,
                truth,
                format: format.into(),
            })?;
        }
        Command::Detect { input, kappa, depths, rescale, format, out } => {
            let to_stdout = out.is_none();
            let report = cmd_detect(&DetectConfig {
                input,
                kappa,
                m_max: depths.m_max,
                l_max: depths.l_max,
                l_cap: depths.l_cap,
                rescale,
                format: format.into(),
                out,
            })?;
            if to_stdout {
                print!("{}", render_report(&report));
            }
        }
        Command::Experiment { ns, runs, process, depths, out } => {
            let to_stdout = out.is_none();
            let rows = cmd_experiment(&ExperimentConfig {
                ns,
                runs,
                kappa: process.kappa,
                lambda_min: process.lambda_min,
                alphas: process.alphas,
                u1: process.u1,
                u2: process.u2,
                seed: process.seed,
                m_max: depths.m_max,
                l_max: depths.l_max,
                l_cap: depths.l_cap,
                out,
            })?;
            if to_stdout {
                print!("{}", render_experiment_csv(&rows));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // clap itself exits with code 2 on flag parse errors, matching the
    // documented parse-error code.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cpd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
