use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use dexsel_core::analysis::Pooling;
use dexsel_core::corpus::{load_candidates, TargetKind};
use dexsel_core::des::{
    derive_des4_weights, select_by_length, select_experts, write_submission, DesConfig, LengthSelectConfig,
    SelectionResult, PRECALCULATED_METRICS,
};
use dexsel_core::scores::{add_overall_column, MissingPolicy, ScoreTable, OVERALL};
use dexsel_core::Execution;
use serde::Serialize;

use super::{create, load_rows, resolve_strategy, table_for, Policy, Strategy, Target};
use crate::manifest::{sibling, RunManifest};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Long-form score CSVs for the candidates (repeatable).
    #[arg(long)]
    scores: Vec<PathBuf>,
    #[arg(long)]
    candidates: PathBuf,
    /// Preset name (des1..des5) or path to a JSON config.
    #[arg(long)]
    config: String,
    #[arg(long, value_enum)]
    target: Target,
    /// Model ranking for des5, best first.
    #[arg(long, value_delimiter = ',')]
    ranking: Vec<String>,
    /// Validation-split score CSVs for des4 weights: pre-calculated
    /// metrics plus either `overall` or the eight challenge metrics.
    #[arg(long)]
    validation: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    policy: Policy,
    /// Submission CSV (`hadm_id,text`); the selection record is written
    /// next to it as `<stem>.selection.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct SelectionRecord<'a> {
    #[serde(flatten)]
    result: &'a SelectionResult,
    config: serde_json::Value,
}

pub fn des4_config(validation: &[PathBuf]) -> anyhow::Result<DesConfig> {
    if validation.is_empty() {
        bail!("des4 needs --validation score files");
    }
    let rows = load_rows(validation)?;
    let mut table = ScoreTable::from_rows(&rows)?;
    if !table.has_metric(OVERALL) {
        add_overall_column(&mut table, MissingPolicy::Lenient)?;
    }
    let metrics: Vec<&str> = PRECALCULATED_METRICS
        .iter()
        .copied()
        .filter(|m| table.has_metric(m))
        .collect();
    if metrics.is_empty() {
        bail!("validation scores contain none of {}", PRECALCULATED_METRICS.join(", "));
    }
    Ok(derive_des4_weights(&table, &table, OVERALL, &metrics, Pooling::Pooled)?)
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let target: TargetKind = args.target.into();
    let mut manifest = RunManifest::new(
        "select",
        serde_json::json!({
            "config": args.config,
            "target": target.as_str(),
            "ranking": args.ranking,
            "policy": format!("{:?}", args.policy),
        }),
    );
    manifest.input(&args.candidates)?;
    for p in args.scores.iter().chain(&args.validation) {
        manifest.input(p)?;
    }
    let config_path = PathBuf::from(&args.config);
    if config_path.is_file() {
        manifest.input(&config_path)?;
    }
    let candidates = load_candidates(&args.candidates)?;

    let (result, config_json) = match resolve_strategy(&args.config)? {
        Strategy::Length => {
            if args.ranking.is_empty() {
                bail!("des5 needs --ranking");
            }
            let cfg = LengthSelectConfig::new(args.ranking.clone());
            let json = serde_json::to_value(&cfg)?;
            (select_by_length(&candidates, target, &cfg)?, json)
        }
        strategy => {
            let config = match strategy {
                Strategy::Weighted(c) => c,
                _ => des4_config(&args.validation)?,
            };
            let table = table_for(&candidates, &load_rows(&args.scores)?)?;
            let result = select_experts(&table, &config, target, args.policy.into(), Execution::default())
                .context("selecting experts")?;
            (result, serde_json::to_value(&config)?)
        }
    };

    let submission = result.submission(&candidates)?;
    let mut w = create(&args.out)?;
    write_submission(&mut w, &submission)?;
    w.flush()?;
    manifest.output(&args.out);

    let record_path = sibling(&args.out, ".selection.json");
    let record = SelectionRecord {
        result: &result,
        config: config_json,
    };
    std::fs::write(&record_path, serde_json::to_string_pretty(&record)? + "\n")
        .with_context(|| format!("writing {}", record_path.display()))?;
    manifest.output(&record_path);

    for (model, wins) in &result.tally {
        eprintln!("{model}: {wins}");
    }
    manifest.write(&sibling(&args.out, ".manifest.json"))
}
