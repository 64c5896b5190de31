//! `sagnac-lab`: simulate gyroscope datasets, analyze them, and sweep
//! systematic parameters.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use sagnac_core::sweep::SweepParameter;

use commands::{AnalyzeArgs, MethodArg};

/// Exit status 1: bad usage or configuration. Exit status 2: bad data.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

#[derive(Parser)]
#[command(name = "sagnac-lab", version, about = "Area-reversible atom-interferometer gyroscope simulator and stability analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Min,
    Extrapolate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Param {
    #[value(name = "bias_field")]
    BiasField,
    #[value(alias = "pulse_offset_delta")]
    Delta,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a run configuration.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Analyze a dataset and write a report plus plot files next to it.
    Analyze {
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Auxiliary channels to regress out (default: all).
        #[arg(long, value_delimiter = ',')]
        channels: Option<Vec<String>>,
        /// Log-spaced averaging times, `start:stop:points` in seconds.
        #[arg(long, value_parser = parse_taus)]
        taus: Option<(f64, f64, usize)>,
        #[arg(long, value_enum, default_value = "min")]
        method: Method,
        /// Extrapolation target, s (default: the longest reported tau).
        #[arg(long)]
        target_tau: Option<f64>,
        /// Use the overlapping Allan estimator.
        #[arg(long)]
        overlapping: bool,
        /// Channels in the reduced regression curve.
        #[arg(long, default_value_t = 3)]
        k_channels: usize,
        /// rad/(rad/s); defaults to the value implied by the recorded instrument.
        #[arg(long)]
        scale_factor: Option<f64>,
        /// ARW band `lo:hi` in Hz (default: upper half of the spectrum).
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        arw_band: Option<(f64, f64)>,
    },
    /// Evaluate noiseless phases across a range of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        param: Param,
        /// `lo:hi` in tesla for bias_field, metres for delta.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        range: (f64, f64),
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("`{a}` is not a number"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("`{b}` is not a number"))?;
    Ok((lo, hi))
}

fn parse_taus(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err("expected start:stop:points".into());
    };
    let start: f64 = a.parse().map_err(|_| format!("`{a}` is not a number"))?;
    let stop: f64 = b.parse().map_err(|_| format!("`{b}` is not a number"))?;
    let points: usize = n.parse().map_err(|_| format!("`{n}` is not a point count"))?;
    Ok((start, stop, points))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, out, seed } => commands::simulate_cmd(&config, &out, seed),
        Command::Analyze {
            dataset,
            out,
            channels,
            taus,
            method,
            target_tau,
            overlapping,
            k_channels,
            scale_factor,
            arw_band,
        } => commands::analyze_cmd(&AnalyzeArgs {
            dataset,
            out,
            channels,
            taus,
            method: match method {
                Method::Min => MethodArg::Min,
                Method::Extrapolate => MethodArg::Extrapolate,
            },
            target_tau,
            overlapping,
            k_channels,
            scale_factor,
            arw_band,
        }),
        Command::Sweep {
            config,
            param,
            range,
            steps,
            out,
        } => {
            let parameter = match param {
                Param::BiasField => SweepParameter::BiasField,
                Param::Delta => SweepParameter::Delta,
            };
            commands::sweep_cmd(&config, parameter, range, steps, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let benign = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if benign { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
