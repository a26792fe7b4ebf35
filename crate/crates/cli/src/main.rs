use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lbexp::Execution;
use lbexp_cli::{commands, execute, CliError, Command, ConfigError, RunConfig};

/// Laplace-Beltrami eigenvalues on subdomains of simple host spaces.
#[derive(Debug, Parser)]
#[command(name = "lbexp", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides `seed` in the configuration.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Run every reduction on one thread in a fixed order, so identical
    /// inputs give byte-identical outputs.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Caps the worker threads.
    #[arg(long, global = true, env = "LBEXP_THREADS", value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Sub {
    /// Spectrum, leakage and sampled mode grids.
    Solve,
    /// Level-spacing histogram and Poisson/GOE classification.
    Stats,
    /// Lowest eigenvalues over a sweep of V0 or N.
    Convergence,
    /// Expansion against finite differences on a rectangle.
    FdCompare,
    /// Boundary fit of the domain in candidate hosts.
    FitScore,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Solve => Command::Solve,
            Sub::Stats => Command::Stats,
            Sub::Convergence => Command::Convergence,
            Sub::FdCompare => Command::FdCompare,
            Sub::FitScore => Command::FitScore,
        }
    }
}

fn load(path: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    let path = path.ok_or_else(|| ConfigError::new("--config", "a configuration file is required"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("--config", format!("cannot read {}: {e}", path.display())))?;
    Ok(RunConfig::from_toml(&text)?)
}

fn cap_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(ConfigError::new("--threads", "must be at least 1").into());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError::new("--threads", e.to_string()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    cap_threads(cli.threads)?;
    let mut config = load(cli.config.as_ref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out = commands::output_dir(cli.out, &config);
    let exec = if cli.deterministic { Execution::Sequential } else { Execution::Parallel };
    for path in execute(cli.command.into(), config, &out, exec)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lbexp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
