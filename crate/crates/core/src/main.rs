use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vargrad_lab::harness::config::{parse_config, ExperimentKind};
use vargrad_lab::harness::{run, HarnessError};

#[derive(Parser)]
#[command(name = "vargrad-lab", version, about = "Gradient-estimator variance experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; overrides `output` in the config. Stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    TrainLogreg(RunArgs),
    VarianceSweep(RunArgs),
    DeltaRatio(RunArgs),
    GaussianOracles(RunArgs),
    Unbiasedness(RunArgs),
    CvComparison(RunArgs),
}

impl Command {
    fn split(self) -> (ExperimentKind, RunArgs) {
        match self {
            Command::TrainLogreg(a) => (ExperimentKind::TrainLogreg, a),
            Command::VarianceSweep(a) => (ExperimentKind::VarianceSweep, a),
            Command::DeltaRatio(a) => (ExperimentKind::DeltaRatio, a),
            Command::GaussianOracles(a) => (ExperimentKind::GaussianOracles, a),
            Command::Unbiasedness(a) => (ExperimentKind::Unbiasedness, a),
            Command::CvComparison(a) => (ExperimentKind::CvComparison, a),
        }
    }
}

fn execute(kind: ExperimentKind, args: RunArgs) -> Result<(), HarnessError> {
    let mut config = parse_config(&args.config)?;
    if config.experiment != kind {
        return Err(HarnessError::Config(vargrad_lab::harness::config::ConfigError {
            message: format!(
                "config is for {:?} but the subcommand is {kind}",
                config.experiment.name()
            ),
            line: None,
        }));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let table = run(&config)?;
    match args.out.or(config.output.clone()) {
        Some(path) => table.save(&path)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let (kind, args) = Cli::parse().command.split();
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vargrad-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
