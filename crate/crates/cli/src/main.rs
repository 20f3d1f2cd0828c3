use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use graphrx_cli::commands::{kg, mol, prop, Outcome};
use graphrx_cli::config::{resolve, CommonArgs};
use graphrx_cli::report;

const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    "\ncheckpoint format GRAPHRX-CKPT/1\nfeature scheme atom33/1"
);

/// Graph machine learning for molecules and knowledge graphs.
///
/// Every command takes `--config PATH` (flat TOML), `--seed N`, `--out DIR`
/// and `key=value` overrides; flags beat the file, which beats defaults.
#[derive(Debug, Parser)]
#[command(name = "graphrx", version = LONG_VERSION)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a SMILES file and report per-molecule structure.
    MolParse(CommonArgs),
    /// Export each molecule of a SMILES file as a DOT graph.
    MolViz(CommonArgs),
    /// Write the synthetic cyclic knowledge graph as split TSVs.
    GenKg(CommonArgs),
    /// Train a knowledge-graph embedding model.
    KgTrain(CommonArgs),
    /// Filtered link-prediction metrics of a checkpoint on one split.
    KgEval(CommonArgs),
    /// Highest-scoring tails for a head and relation.
    KgQuery(CommonArgs),
    /// Train a molecular property model.
    PropTrain(CommonArgs),
    /// Evaluate a property checkpoint on a molecule CSV.
    PropEval(CommonArgs),
    /// Validate a JSONL report against the record schema.
    CheckReport {
        /// Report files.
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::MolParse(a) => mol::parse(&resolve(&a)?),
        Command::MolViz(a) => mol::viz(&resolve(&a)?),
        Command::GenKg(a) => kg::gen_kg(&resolve(&a)?),
        Command::KgTrain(a) => kg::train(&resolve(&a)?),
        Command::KgEval(a) => kg::eval(&resolve(&a)?),
        Command::KgQuery(a) => kg::query(&resolve(&a)?),
        Command::PropTrain(a) => prop::train(&resolve(&a)?),
        Command::PropEval(a) => prop::eval(&resolve(&a)?),
        Command::CheckReport { reports } => {
            for path in &reports {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let n = report::check(&text).with_context(|| format!("{}", path.display()))?;
                println!("{}: {n} records ok", path.display());
            }
            Ok(Outcome { ok: true })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome { ok: true }) => ExitCode::SUCCESS,
        Ok(Outcome { ok: false }) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
