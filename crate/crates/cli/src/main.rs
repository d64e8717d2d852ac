//! `qspectral` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 failed verification.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qspectral::Mode;

use config::{parse_config, Overrides};
use run::{Options, Pipeline, RunError};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_VERIFICATION: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "qspectral", version, about = "q²-Fourier transforms and spectral q-heat / q-wave solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV files and report.json.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Overrides the configured transform mode.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,

    /// Overrides the starting precision of the kernel recurrence.
    #[arg(long, global = true)]
    precision_digits: Option<u32>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Half,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Forward transform of the initial datum.
    Transform,
    /// Solve the q-heat problem.
    SolveHeat,
    /// Solve the damped homogeneous q-wave problem.
    SolveWave,
    /// Solve the forced q-wave problem with zero Cauchy data.
    SolveForcedWave,
    /// Residual, a priori and uniqueness checks; solves first unless --trajectory is given.
    Verify {
        /// Stored solution CSV (t,k,sign,x,re_u,im_u) to check instead of solving.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Certified kernel table e_{q²}(i q^m) as CSV.
    KernelTable,
    /// Errors against the classical limits as q -> 1.
    LimitStudy,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (pipeline, trajectory) = match cli.command {
        Command::Transform => (Pipeline::Transform, None),
        Command::SolveHeat => (Pipeline::SolveHeat, None),
        Command::SolveWave => (Pipeline::SolveWave, None),
        Command::SolveForcedWave => (Pipeline::SolveForcedWave, None),
        Command::Verify { trajectory } => (Pipeline::Verify, trajectory),
        Command::KernelTable => (Pipeline::KernelTable, None),
        Command::LimitStudy => (Pipeline::LimitStudy, None),
    };
    let Some(path) = cli.config else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(EXIT_CONFIG);
    };
    let overrides = Overrides {
        mode: cli.mode.map(|m| match m {
            ModeArg::Full => Mode::FullLine,
            ModeArg::Half => Mode::HalfLine,
        }),
        precision_digits: cli.precision_digits,
    };
    let cfg = match parse_config(&path, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let opts = Options {
        out: cli.out,
        trajectory,
    };
    match run::run(pipeline, &cfg, &opts) {
        Ok(outcome) => {
            for a in &outcome.artifacts {
                println!("wrote {}", a.display());
            }
            if pipeline.verifies() && !outcome.passed {
                eprintln!("verification failed; see report.json");
                ExitCode::from(EXIT_VERIFICATION)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(RunError::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(RunError::Numeric(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}
