use std::io::Write;
use std::path::PathBuf;

use anyhow::bail;
use dexsel_core::analysis::correlation_matrix;
use dexsel_core::des::PRECALCULATED_METRICS;
use dexsel_core::scores::{add_overall_column, MissingPolicy, ScoreTable, OVERALL};

use super::{create, load_rows, PoolingArg};
use crate::manifest::{sibling, RunManifest};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Score CSVs holding the metrics to correlate (repeatable).
    #[arg(long, required = true)]
    scores: Vec<PathBuf>,
    /// Score CSV with the overall-score variants (or the eight challenge
    /// metrics, from which `overall` is computed).
    #[arg(long)]
    overall: PathBuf,
    /// Metrics to correlate (default: the pre-calculated scores present).
    #[arg(long, value_delimiter = ',')]
    metrics: Vec<String>,
    /// Overall-score columns to correlate against.
    #[arg(long, value_delimiter = ',', default_value = OVERALL)]
    variants: Vec<String>,
    #[arg(long, value_enum, default_value_t)]
    pooling: PoolingArg,
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let mut manifest = RunManifest::new(
        "correlate",
        serde_json::json!({
            "metrics": args.metrics,
            "variants": args.variants,
            "pooling": format!("{:?}", args.pooling),
        }),
    );
    for p in args.scores.iter().chain([&args.overall]) {
        manifest.input(p)?;
    }
    let scores = ScoreTable::from_rows(&load_rows(&args.scores)?)?;
    let mut overall = ScoreTable::from_rows(&load_rows(std::slice::from_ref(&args.overall))?)?;
    if args.variants.iter().any(|v| v == OVERALL) && !overall.has_metric(OVERALL) {
        add_overall_column(&mut overall, MissingPolicy::Lenient)?;
    }
    let metrics: Vec<String> = if args.metrics.is_empty() {
        PRECALCULATED_METRICS
            .iter()
            .filter(|m| scores.has_metric(m))
            .map(|m| m.to_string())
            .collect()
    } else {
        args.metrics.clone()
    };
    if metrics.is_empty() {
        bail!("no metrics to correlate");
    }
    for m in &metrics {
        if !scores.has_metric(m) {
            bail!("metric {m} not found in --scores");
        }
    }
    for v in &args.variants {
        if !overall.has_metric(v) {
            bail!("overall variant {v} not found in --overall");
        }
    }
    let matrix = correlation_matrix(&scores, &metrics, &overall, &args.variants, args.pooling.into())?;
    let mut w = create(&args.out)?;
    matrix.write_csv(&mut w)?;
    w.flush()?;
    manifest.output(&args.out);
    eprintln!(
        "wrote {}x{} correlations to {}",
        metrics.len(),
        matrix.variants.len(),
        args.out.display()
    );
    manifest.write(&sibling(&args.out, ".manifest.json"))
}
