mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{cmd_run, cmd_sweep, cmd_verify, parse_sizes, Outputs, SweepParam, VerifyArgs};
use crate::error::CliError;

/// Run passage protocols, parameter sweeps and the randomized verification suites.
#[derive(Debug, Parser)]
#[command(name = "passage", version)]
struct Cli {
    /// Worker threads for sweeps and suites (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every decay setting of a config.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config's `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Steps per protocol stage (overrides `grid.steps_per_stage`).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Run a config once per value of one parameter.
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Randomized frame, residual, reconstruction, conversion and reduction suites.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_m: usize,
        #[arg(long, default_value_t = 4)]
        max_n: usize,
        /// Explicit sizes as `MxN,MxN`; replaces the bounds. An empty string runs nothing.
        #[arg(long)]
        sizes: Option<String>,
        /// Instances per suite.
        #[arg(long)]
        instances: Option<usize>,
        /// Add a constant to the synthesized detuning; the residual suite should then fail.
        #[arg(long, allow_negative_numbers = true)]
        inject_detuning: Option<f64>,
        /// Directory for `verify.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config, out, grid } => {
            cmd_run(&config, &Outputs { dir: out, grid })
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
            grid,
        } => {
            cmd_sweep(&config, param, &values, &Outputs { dir: out, grid })
        }
        Command::Verify {
            seed,
            max_m,
            max_n,
            sizes,
            instances,
            inject_detuning,
            out,
        } => {
            let sizes = sizes.as_deref().map(parse_sizes).transpose()?;
            cmd_verify(&VerifyArgs {
                seed,
                max_m,
                max_n,
                sizes,
                instances,
                inject_detuning,
                out,
            })
            .map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
