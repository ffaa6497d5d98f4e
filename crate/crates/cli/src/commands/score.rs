use std::io::Write;
use std::path::PathBuf;

use anyhow::bail;
use dexsel_core::corpus::{load_candidates, load_corpus, load_targets};
use dexsel_core::scores::{
    add_overall_column, compute_factuality_proxies, compute_native_scores, load_external_scores, merge_tables,
    NativeMetric, References, ScoreTable,
};
use dexsel_core::Execution;

use super::{create, Policy};
use crate::manifest::{sibling, RunManifest};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// JSONL with `hadm_id`, `model_id`, `target`, `text`.
    #[arg(long)]
    candidates: PathBuf,
    /// Reference targets (targets.jsonl from `extract`).
    #[arg(long)]
    references: Option<PathBuf>,
    /// Corpus JSONL; reference-based metrics are also computed against each
    /// summary body and stored with a `_ds` suffix.
    #[arg(long)]
    against_ds: Option<PathBuf>,
    /// Native metrics to compute (default: everything the inputs allow).
    #[arg(long, value_delimiter = ',')]
    metrics: Vec<NativeMetric>,
    /// Externally computed scores to merge (long-form CSV).
    #[arg(long)]
    external: Vec<PathBuf>,
    /// Also add the eight-metric `overall` column.
    #[arg(long)]
    overall: bool,
    #[arg(long, value_enum, default_value_t)]
    policy: Policy,
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let metrics: Vec<NativeMetric> = if args.metrics.is_empty() {
        NativeMetric::ALL
            .into_iter()
            .filter(|m| !m.needs_reference() || args.references.is_some() || args.against_ds.is_some())
            .collect()
    } else {
        args.metrics.clone()
    };
    let (with_ref, readability): (Vec<NativeMetric>, Vec<NativeMetric>) =
        metrics.iter().partition(|m| m.needs_reference());
    if !with_ref.is_empty() && args.references.is_none() && args.against_ds.is_none() {
        bail!("reference-based metrics need --references or --against-ds");
    }

    let mut manifest = RunManifest::new(
        "score",
        serde_json::json!({
            "metrics": metrics.iter().map(|m| m.name()).collect::<Vec<_>>(),
            "references": args.references.is_some(),
            "against_ds": args.against_ds.is_some(),
            "external": args.external.len(),
            "overall": args.overall,
            "policy": format!("{:?}", args.policy),
        }),
    );
    manifest.input(&args.candidates)?;
    let candidates = load_candidates(&args.candidates)?;
    let exec = Execution::default();

    let mut table = ScoreTable::from_candidates(&candidates);
    match &args.references {
        Some(path) => {
            manifest.input(path)?;
            let refs = References::new(load_targets(path)?);
            merge_tables(&mut table, &compute_native_scores(&candidates, &refs, &metrics, exec)?)?;
        }
        None if !readability.is_empty() => {
            let refs = References::default();
            merge_tables(
                &mut table,
                &compute_native_scores(&candidates, &refs, &readability, exec)?,
            )?;
        }
        None => {}
    }
    if let Some(path) = &args.against_ds {
        manifest.input(path)?;
        if !with_ref.is_empty() {
            let corpus = load_corpus(path)?;
            merge_tables(
                &mut table,
                &compute_factuality_proxies(&candidates, &corpus, &with_ref, exec)?,
            )?;
        }
    }
    for path in &args.external {
        manifest.input(path)?;
        table = load_external_scores(path, table)?;
    }
    if args.overall {
        add_overall_column(&mut table, args.policy.into())?;
    }

    let mut w = create(&args.out)?;
    table.write_csv(&mut w)?;
    w.flush()?;
    manifest.output(&args.out);
    eprintln!(
        "scored {} candidate(s) on {} metric(s) into {}",
        candidates.len(),
        table.metrics().len(),
        args.out.display()
    );
    manifest.write(&sibling(&args.out, ".manifest.json"))
}
