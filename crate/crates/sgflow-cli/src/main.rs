//! Command-line harness around the sgflow library: verification suites,
//! descent runs, comparison property runs, and minimizer sweeps, all driven
//! by a sectioned key=value config file and a seed for exact reproducibility.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

mod cmd_compare;
mod cmd_flow;
mod cmd_minimize;
mod cmd_sweep;
mod cmd_verify;
mod config;
mod report;

use config::Settings;

#[derive(Parser)]
#[command(
    name = "sgflow",
    version,
    about = "Sobolev-gradient descent flows: verification suites, runs, and minimizer sweeps"
)]
struct Cli {
    /// Config file (TOML sections [grid]/[operator]/[potential]/[flow]/[run]);
    /// omitted = built-in defaults
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override the RNG seed from the config
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the output directory from the config
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Print the summary JSON to stdout instead of the one-line report
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the operator-identity, quadrature-oracle, smoothing-bound, and
    /// positivity suites; nonzero exit if any asserted check fails
    Verify {
        /// Run only checks whose name or suite contains this string
        #[arg(long, value_name = "FILTER")]
        only: Option<String>,
        /// Override a check tolerance as <check>=<value>; repeatable
        #[arg(long, value_name = "CHECK=VALUE")]
        tolerance: Vec<String>,
    },
    /// Evolve the flow and write trajectory.csv plus summary.json
    Flow {
        /// Initial state: "zero", "random", or a state CSV from a prior run
        #[arg(long, default_value = "zero", value_name = "SOURCE")]
        u0: String,
        /// Sup-norm amplitude of the "random" initial state
        #[arg(long, default_value_t = 0.5)]
        amplitude: f64,
    },
    /// Run seeded ordered comparison pairs; nonzero exit on a violation
    Compare {
        /// Number of random ordered pairs
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        /// Skip the gamma > sup|V22| precondition and record gaps only
        #[arg(long)]
        exploratory: bool,
    },
    /// Descend to a plane-like minimizer at one rational frequency
    Minimize {
        /// Rotation vector "q1,...,qd/N" (missing /N means denominator 1)
        #[arg(long, value_name = "OMEGA")]
        omega: String,
        /// Birkhoff check window
        #[arg(long, default_value_t = 3)]
        window: i64,
    },
    /// Minimize across a list of frequencies, one CSV row per frequency
    Sweep {
        /// Use golden-mean convergents 1/2, 2/3, 3/5, ...
        #[arg(long)]
        golden: bool,
        /// Number of convergents for --golden
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// File with one "q1,...,qd/N" per line (alternative to --golden)
        #[arg(long, value_name = "PATH")]
        omegas: Option<PathBuf>,
        /// Birkhoff check window
        #[arg(long, default_value_t = 3)]
        window: i64,
        /// Side length of the oscillation cube
        #[arg(long, default_value_t = 1.0)]
        osc_side: f64,
    },
}

fn dispatch(cli: Cli) -> Result<bool> {
    let settings = Settings::load(cli.config.as_deref(), cli.seed, cli.out.as_deref())?;
    match &cli.command {
        Command::Verify { only, tolerance } => {
            cmd_verify::run(&settings, only.as_deref(), tolerance, cli.json)
        }
        Command::Flow { u0, amplitude } => cmd_flow::run(&settings, u0, *amplitude, cli.json),
        Command::Compare { pairs, exploratory } => {
            cmd_compare::run(&settings, *pairs, *exploratory, cli.json)
        }
        Command::Minimize { omega, window } => {
            cmd_minimize::run(&settings, omega, *window, cli.json)
        }
        Command::Sweep { golden, levels, omegas, window, osc_side } => {
            let args = cmd_sweep::SweepArgs {
                golden: *golden,
                levels: *levels,
                omegas: omegas.as_deref(),
                window: *window,
                osc_side: *osc_side,
            };
            cmd_sweep::run(&settings, &args, cli.json)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
