//! Command-line front end: four subcommands over one TOML config file.
//! Exit codes: 0 success (including a classical witness verdict), 2 config
//! error, 3 numerical non-convergence, 4 inconclusive witness.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use omtomo::run::{execute, exit_code, Mode, RunOptions};

/// Environment variable overriding the worker thread count.
const THREADS_ENV: &str = "OMTOMO_THREADS";

#[derive(Parser)]
#[command(
    name = "omtomo",
    version,
    about = "Pulsed optomechanical readout: tomography, nonclassicality witnesses, \
             classical-readout comparison, and platform feasibility screening"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created atomically; must not already hold files).
    #[arg(long)]
    out: PathBuf,
    /// Seed for the synthetic-noise generators.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also emit SVG plots (heatmaps and tomogram line plots).
    #[arg(long, default_value_t = false)]
    plots: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the pulsed readout over a sweep of angles and reconstruct
    /// the mechanical quasiprobability distribution.
    Tomography(CommonArgs),
    /// Run both demarginalization maps on a single extracted tomogram and
    /// report the nonclassicality verdict.
    Witness(CommonArgs),
    /// Apply the continuous-readout kernel to the same state and demonstrate
    /// the instability of naively deconvolving it.
    CompareClassical(CommonArgs),
    /// Screen optomechanical platforms for admissible pulses and report
    /// sideband regime, pulse length, and drive energy.
    Feasibility(CommonArgs),
}

fn main() -> ExitCode {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        match value.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("omtomo: could not set thread count: {e}");
                }
            }
            _ => {
                eprintln!("omtomo: {THREADS_ENV}={value} is not a positive integer");
                return ExitCode::from(2);
            }
        }
    }

    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Tomography(a) => (Mode::Tomography, a),
        Command::Witness(a) => (Mode::Witness, a),
        Command::CompareClassical(a) => (Mode::CompareClassical, a),
        Command::Feasibility(a) => (Mode::Feasibility, a),
    };
    let opts = RunOptions {
        config: args.config.clone(),
        out: args.out.clone(),
        seed: args.seed,
        plots: args.plots,
    };
    let result = execute(mode, &opts);
    if let Err(e) = &result {
        eprintln!("omtomo: {e}");
    }
    ExitCode::from(exit_code(&result) as u8)
}
