use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use tmlambda_cli::pipelines::{self, FitModel};
use tmlambda_cli::Loaded;

/// Tm:YAG Λ-system simulator: forward models and branching-ratio extraction.
#[derive(Parser)]
#[command(name = "tmlambda", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Noise seed; overrides `[noise] seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// R(Θ), Δg and Δe per site group over the Θ grid.
    Sweep(Common),
    /// Hole-burning spectrum and feature list.
    Spectrum(Common),
    /// Nutation cases a–d, fits, and ρ/R extraction.
    Nutation(Common),
    /// Echo dataset and R from the weighted-echo intersection.
    Echo(Common),
    /// Hole-depth decay and lifetime fits.
    Lifetime(Common),
    /// Fit an external two-column CSV.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        model: FitModel,
    },
}

fn run(cli: Cli) -> Result<()> {
    let common = match &cli.command {
        Command::Sweep(c)
        | Command::Spectrum(c)
        | Command::Nutation(c)
        | Command::Echo(c)
        | Command::Lifetime(c)
        | Command::Fit { common: c, .. } => c,
    };
    let mut loaded = Loaded::from_path(&common.config)?;
    if let Some(seed) = common.seed {
        loaded.scenario.noise.seed = seed;
    }
    let artifacts = match &cli.command {
        Command::Sweep(_) => pipelines::run_sweep(&loaded),
        Command::Spectrum(_) => pipelines::run_spectrum(&loaded),
        Command::Nutation(_) => pipelines::run_nutation(&loaded),
        Command::Echo(_) => pipelines::run_echo(&loaded),
        Command::Lifetime(_) => pipelines::run_lifetime(&loaded),
        Command::Fit { input, model, .. } => {
            let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
            pipelines::run_fit(&loaded, &input.display().to_string(), &bytes, *model)
        }
    }?;
    artifacts.write_to(&common.out)?;
    for name in artifacts.files.keys() {
        println!("{}", common.out.join(name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
