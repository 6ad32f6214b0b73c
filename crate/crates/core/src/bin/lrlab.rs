use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use lrlab::cli::{configure_threads_from_env, run_command, Command, RunOptions, EXIT_USAGE};
use lrlab::config::parse_config;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Check,
    Constants,
    Chains,
    Bound,
    Simulate,
    Verify,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Check => Command::Check,
            Cmd::Constants => Command::Constants,
            Cmd::Chains => Command::Chains,
            Cmd::Bound => Command::Bound,
            Cmd::Simulate => Command::Simulate,
            Cmd::Verify => Command::Verify,
        }
    }
}

/// Lieb-Robinson bounds for commutator-bounded lattice Hamiltonians.
///
/// Exit status: 0 pass, 1 a checked invariant failed, 2 usage or I/O error.
/// LRLAB_THREADS caps the worker pool.
#[derive(Debug, Parser)]
#[command(name = "lrlab", version)]
struct Args {
    command: Cmd,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Decay-rate parameter; defaults to the config value, else 1/R.
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Output directory; defaults to the config value.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scale every bound in `verify` (harness self-test).
    #[arg(long, hide = true, default_value_t = 1.0)]
    bound_scale: f64,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = configure_threads_from_env()
        .and_then(|_| parse_config(&args.config))
        .and_then(|cfg| {
            let opts = RunOptions {
                lambda: args.lambda,
                out: args.out.clone(),
                bound_scale: args.bound_scale,
            };
            run_command(args.command.into(), &cfg, &opts)
        });
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for p in &outcome.artifacts {
                println!("  wrote {}", p.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("lrlab: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
