//! `socsim` command-line driver.
//!
//! Exit codes: 0 ok, 2 bad input, 3 configuration error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "socsim",
    version,
    about = "Social network analysis and society simulation"
)]
pub struct Cli {
    /// JSON simulator/analysis config; missing fields take defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Analysis window and simulation step, in seconds.
    #[arg(long, global = true)]
    pub window: Option<i64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scope {
    All,
    New,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the synthetic fixture event log.
    Fixture {
        #[arg(long, default_value_t = 300)]
        initial: usize,
        #[arg(long, default_value_t = 10)]
        windows: usize,
        #[arg(long, default_value = "fixture.csv")]
        name: String,
    },
    /// Validate an event log and write it back in canonical order.
    Ingest { input: PathBuf },
    /// Snapshot at `--at`: relations, network measures, groups and roles.
    Analyze {
        input: PathBuf,
        #[arg(long)]
        at: Option<i64>,
    },
    /// Groups per window and their evolution.
    Communities {
        input: PathBuf,
        #[arg(long, default_value_t = 0.3)]
        threshold: f64,
    },
    /// Rank unlinked pairs at `--split` and score them against later edges.
    PredictLinks {
        input: PathBuf,
        #[arg(long)]
        split: i64,
        #[arg(long, default_value = "CN")]
        model: String,
        #[arg(long, default_value_t = 20)]
        k: usize,
    },
    /// Role profiles and categories at `--at`.
    AssignRoles {
        input: PathBuf,
        #[arg(long)]
        at: Option<i64>,
    },
    /// Configure the simulator from events before `--split` and run it.
    Simulate {
        input: PathBuf,
        /// Defaults to the end of the log; the run then lasts `steps`.
        #[arg(long)]
        split: Option<i64>,
    },
    /// Coordinate search over decay, observer threshold and action scale.
    Calibrate {
        input: PathBuf,
        #[arg(long)]
        split: i64,
        #[arg(long, default_value_t = 3)]
        rounds: usize,
    },
    /// Compare role distributions of an observed and a predicted log.
    Compare {
        observed: PathBuf,
        predicted: PathBuf,
        /// Start of the predicted period; required for `--scope new`.
        #[arg(long)]
        split: Option<i64>,
        #[arg(long)]
        at: Option<i64>,
        #[arg(long, value_enum, default_value_t = Scope::All)]
        scope: Scope,
        /// `simulation.json` whose config is echoed into the report.
        #[arg(long)]
        simulation: Option<PathBuf>,
    },
    /// Render a comparison as CSV, JSON and/or SVG.
    Report {
        comparison: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::All)]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("socsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
