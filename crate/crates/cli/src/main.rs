use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};
use gwlab_cli::config::ExperimentConfig;
use gwlab_cli::{commands, resolve_out_dir};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gwlab",
    version,
    about = "Monte Carlo experiments for biased random walks on Galton-Watson trees"
)]
struct Cli {
    /// Experiment config file (key = value lines).
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides GWLAB_OUT_DIR and the config's out_dir).
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Speed curve over the bias grid, from regeneration blocks.
    Speed,
    /// Derivative of the speed: covariance estimator vs finite differences.
    Derivative,
    /// Change-of-measure checks for the walk weight.
    GirsanovCheck,
    /// Annealed escape probabilities via conductance recursion.
    Escape,
    /// Block-moment and trap-moment diagnostics.
    Diagnostics,
    /// Parse and validate the config, print its canonical form.
    Validate,
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig> {
    let path = path
        .as_ref()
        .ok_or_else(|| anyhow!("--config <FILE> is required"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow!("cannot read config {}: {e}", path.display()))?;
    ExperimentConfig::parse(&text)
}

fn run(cli: Cli) -> Result<()> {
    let config = load_config(&cli.config)?;
    let out_dir = resolve_out_dir(cli.out, &config.out_dir);
    let written = match cli.command {
        Command::Speed => commands::cmd_speed(&config, &out_dir)?,
        Command::Derivative => commands::cmd_derivative(&config, &out_dir)?,
        Command::GirsanovCheck => commands::cmd_girsanov(&config, &out_dir)?,
        Command::Escape => commands::cmd_escape(&config, &out_dir)?,
        Command::Diagnostics => commands::cmd_diagnostics(&config, &out_dir)?,
        Command::Validate => {
            print!("{}", commands::cmd_validate(&config)?);
            return Ok(());
        }
    };
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

/// 0 = success, 2 = validation error, 3 = runtime guard, 1 = anything else.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    if let Some(core_err) = err.downcast_ref::<gwlab_core::Error>() {
        return match core_err {
            gwlab_core::Error::MemoryCap { .. }
            | gwlab_core::Error::RejectionCap { .. }
            | gwlab_core::Error::Convergence(_) => 3,
            _ => 2,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 1;
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
