//! `chol-lag`: run conservative Camassa-Holm scenarios, convert between
//! Eulerian and Lagrangian files, bracket the metric between two pairs and
//! run the validation suites.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use chol_lag::validation::DEFAULT_SEED;
use commands::TransformMode;
use config::Overrides;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "chol-lag", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one or more scenario files, writing snapshots and a manifest per scenario.
    Simulate {
        /// Scenario JSON; repeat to run several scenarios in parallel.
        #[arg(long, required = true)]
        config: Vec<PathBuf>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Map an Eulerian pair to a Lagrangian state or back.
    #[command(group(ArgGroup::new("mode").required(true).args(["to_lagrangian", "to_eulerian", "roundtrip"])))]
    Transform {
        #[arg(long)]
        to_lagrangian: bool,
        #[arg(long)]
        to_eulerian: bool,
        /// Apply both maps to an Eulerian pair and report the discrepancy.
        #[arg(long)]
        roundtrip: bool,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Number of labels used by the Lagrangian side.
        #[arg(long)]
        grid_n: Option<usize>,
    },
    /// Bracket the distance between two Eulerian pairs.
    Metric {
        a: PathBuf,
        b: PathBuf,
        /// Use the distance restricted to energies at most this bound.
        #[arg(long, value_name = "M")]
        restricted: Option<f64>,
        #[arg(long)]
        grid_n: Option<usize>,
        /// Write the bracket here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a validation suite by name, or `all`.
    Validate {
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Also write a JSON report here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            config,
            out_dir,
            grid_n,
            dt,
            t_end,
        } => commands::simulate(&config, &out_dir, &Overrides { grid_n, dt, t_end }),
        Command::Transform {
            to_lagrangian,
            to_eulerian,
            input,
            output,
            grid_n,
            ..
        } => {
            let mode = if to_lagrangian {
                TransformMode::ToLagrangian
            } else if to_eulerian {
                TransformMode::ToEulerian
            } else {
                TransformMode::Roundtrip
            };
            commands::transform(mode, &input, &output, grid_n)
        }
        Command::Metric {
            a,
            b,
            restricted,
            grid_n,
            output,
        } => commands::metric(&a, &b, restricted, grid_n, output.as_deref()),
        Command::Validate {
            suite,
            seed,
            out_dir,
        } => commands::validate(&suite, seed, out_dir.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chol-lag: {e}");
            e.exit_code()
        }
    }
}
