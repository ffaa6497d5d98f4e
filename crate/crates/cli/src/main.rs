use std::panic;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod manifest;

use commands::{correlate, evaluate, extract, reorder, score, select, simulate};

/// Discharge-summary scoring, dynamic expert selection, and section
/// reordering.
#[derive(Debug, Parser)]
#[command(name = "dexsel", version, about)]
struct Cli {
    /// Worker threads for data-parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split summaries into BHC/DI targets and target-free bodies.
    Extract(extract::Args),
    /// Compute native metrics and merge external scores into one table.
    Score(score::Args),
    /// Choose one model output per document.
    Select(select::Args),
    /// Reorder summary sections by relevance and truncate.
    Reorder(reorder::Args),
    /// Score a submission against reference targets.
    Evaluate(evaluate::Args),
    /// Pearson correlations between scores and overall scores.
    Correlate(correlate::Args),
    /// Run selection strategies on a seeded synthetic corpus.
    Simulate(simulate::Args),
}

fn configure_threads(threads: Option<usize>) -> anyhow::Result<()> {
    let Some(n) = threads else { return Ok(()) };
    anyhow::ensure!(n >= 1, "--threads must be at least 1");
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Extract(a) => extract::run(a),
        Command::Score(a) => score::run(a),
        Command::Select(a) => select::run(a),
        Command::Reorder(a) => reorder::run(a),
        Command::Evaluate(a) => evaluate::run(a),
        Command::Correlate(a) => correlate::run(a),
        Command::Simulate(a) => simulate::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(_) => {
            eprintln!("internal error: invariant violated");
            ExitCode::from(2)
        }
    }
}
