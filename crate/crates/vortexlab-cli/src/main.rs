use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use vortexlab_cli::{run, Command, Options};

/// Numerical experiments on twisted holomorphic maps and vortices on cylinders.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 on a
/// configuration error.
#[derive(Debug, Parser)]
#[command(name = "vortexlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// INI configuration; every `[section]` is one scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (one subdirectory per scenario).
    #[arg(long, global = true, default_value = "vortexlab-out")]
    out: PathBuf,
    /// Seed for all randomness; overrides `seed` in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of scenarios run in parallel.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Options { config: cli.config, out: cli.out, seed: cli.seed, jobs: cli.jobs };
    ExitCode::from(run(cli.command, &opts) as u8)
}
