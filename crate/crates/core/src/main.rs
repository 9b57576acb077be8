use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chaotic_cavity::harness::{self, HarnessError, RunConfig};

#[derive(Parser)]
#[command(name = "chaotic-cavity", version, about = "Open chaotic resonators: resonances, noise and laser linewidth")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; built-in example values when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override `ensemble.master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override `outputs.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override `ensemble.n_realizations`.
    #[arg(long, global = true)]
    realizations: Option<usize>,

    /// Override `ensemble.workers` (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Resonances, Petermann factors and level spacings.
    Spectrum,
    /// Stationary covariance: Monte Carlo and Lyapunov.
    Dynamics,
    /// Laser steady state, linewidth and correlator spectrum.
    Laser,
    /// Many realizations with aggregate statistics.
    Ensemble,
    /// Print the example configuration.
    ExampleConfig,
}

fn load(cli: &Cli) -> Result<RunConfig, HarnessError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::example(),
    };
    if let Some(seed) = cli.seed {
        config.ensemble.master_seed = seed;
    }
    if let Some(out) = &cli.out {
        config.outputs.directory = out.clone();
    }
    if let Some(n) = cli.realizations {
        config.ensemble.n_realizations = n;
    }
    if let Some(w) = cli.workers {
        config.ensemble.workers = w;
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    let config = load(cli)?;
    let files = match cli.command {
        Command::ExampleConfig => {
            println!("{}", serde_json::to_string_pretty(&config).expect("config serializes"));
            return Ok(());
        }
        Command::Spectrum => harness::run_spectrum(&config)?,
        Command::Dynamics => harness::run_dynamics(&config)?,
        Command::Laser => harness::run_laser(&config)?,
        Command::Ensemble => {
            let summary = harness::run_ensemble(&config)?;
            if !cli.quiet {
                eprintln!(
                    "{} realizations: {} ok, {} errored",
                    summary.n_realizations,
                    summary.records.len(),
                    summary.errors.len()
                );
                if let Some(k) = summary.petermann {
                    eprintln!("K median {:.6} (q05 {:.6}, q95 {:.6})", k.median, k.q05, k.q95);
                }
            }
            Vec::new()
        }
    };
    if !cli.quiet {
        for f in files {
            eprintln!("wrote {}", f.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
