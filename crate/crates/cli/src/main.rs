use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use zml_cli::{run_experiment, Command, ExperimentSpec};

/// Pseudospectral experiments for viscous conservation laws with zero-mass data.
#[derive(Parser, Debug)]
#[command(name = "zml", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Seed for randomized data.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let spec = ExperimentSpec {
        command: cli.command,
        config_path: cli.config,
        output_dir: cli.out,
        seed: cli.seed,
        threads: cli.threads,
    };
    match run_experiment(&spec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
