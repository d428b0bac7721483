//! Command-line front end: scenario runs, parameter sweeps, detector
//! training and evaluation, gas-model calibration, and config validation.
//!
//! Every subcommand is deterministic given its inputs and seed — running the
//! same invocation twice produces byte-identical files. Exit codes are a
//! stable contract: 0 success, 1 runtime failure, 2 bad input or config.

mod cmds;
mod error;

use clap::{Args, Parser, Subcommand};
use error::CliError;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "vanetsim", version, about = "Clustered vehicular network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario end to end and write its KPI and ledger reports.
    Run(RunArgs),
    /// Run a grid of scenarios over vehicle counts and cluster sizes.
    Sweep(SweepArgs),
    /// Train an isolation forest from a feature CSV and save the model.
    IdsTrain(IdsTrainArgs),
    /// Score a labelled CSV with a saved model and report the metrics.
    IdsEval(IdsEvalArgs),
    /// Calibrate the gas model from a (transactions, gas) measurement table.
    GasFit(GasFitArgs),
    /// Check a scenario config file and print any violations.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario TOML; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if absent).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write the full event log to events.jsonl.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed; each grid cell derives its own seed from it.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Vehicle counts to sweep.
    #[arg(long, value_delimiter = ',', default_value = "20,30,40,50")]
    vehicles: Vec<usize>,
    /// Cluster-size targets to sweep.
    #[arg(long = "cluster-sizes", value_delimiter = ',', default_value = "5,10")]
    cluster_sizes: Vec<u32>,
    /// Number of rounds per cell (overrides the config).
    #[arg(long)]
    rounds: Option<u64>,
}

#[derive(Args)]
struct IdsTrainArgs {
    /// Feature CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Feature column names, in feature order.
    #[arg(long, value_delimiter = ',')]
    features: Vec<String>,
    /// Optional label column (ignored for training).
    #[arg(long)]
    label: Option<String>,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    #[arg(long, default_value_t = 256)]
    subsample: usize,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct IdsEvalArgs {
    /// Saved model (forest.json from ids-train).
    #[arg(long)]
    model: PathBuf,
    /// Labelled feature CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_delimiter = ',')]
    features: Vec<String>,
    /// Label column; "benign" (any case) is negative, anything else positive.
    #[arg(long)]
    label: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct GasFitArgs {
    /// Measurement CSV: header row, then transactions,gas pairs.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Scenario TOML; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(a) => cmds::run(a),
        Command::Sweep(a) => cmds::sweep(a),
        Command::IdsTrain(a) => cmds::ids_train(a),
        Command::IdsEval(a) => cmds::ids_eval(a),
        Command::GasFit(a) => cmds::gas_fit(a),
        Command::Validate(a) => cmds::validate(a),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
