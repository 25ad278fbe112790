use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stable_bayes_cli::config::{ExperimentConfig, ExperimentKind};
use stable_bayes_cli::{experiments, CliError};

#[derive(Parser)]
#[command(
    name = "stable-bayes",
    version,
    about = "Seeded Bayesian inverse-problem experiments with stable priors"
)]
struct Cli {
    /// Path to the JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Draw from a single stable law.
    SampleStable,
    /// Draw functions from a series prior.
    SamplePrior,
    /// Importance-sampling posterior weights and evidence.
    Posterior,
    /// Hellinger and total-variation distance between two posteriors.
    Hellinger,
    /// Hellinger distance ladder over perturbed data.
    LipschitzScan,
    /// Posterior summaries across a grid-refinement ladder.
    Invariance,
    /// Maximum a posteriori estimate by coordinate descent.
    Map,
    /// Metropolis-Hastings posterior sampling.
    Mcmc,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::SampleStable => ExperimentKind::SampleStable,
            Command::SamplePrior => ExperimentKind::SamplePrior,
            Command::Posterior => ExperimentKind::Posterior,
            Command::Hellinger => ExperimentKind::Hellinger,
            Command::LipschitzScan => ExperimentKind::LipschitzScan,
            Command::Invariance => ExperimentKind::Invariance,
            Command::Map => ExperimentKind::Map,
            Command::Mcmc => ExperimentKind::Mcmc,
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    let requested = cli.command.kind();
    if config.experiment != requested {
        return Err(CliError::Validation(format!(
            "subcommand {} does not match the configured experiment {}",
            requested.name(),
            config.experiment.name()
        )));
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load_config(&cli).and_then(|config| experiments::run(&config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
