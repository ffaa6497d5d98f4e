use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use dexsel_core::analysis::Pooling;
use dexsel_core::corpus::synthetic::{
    generate_synthetic_corpus, model_id, score_synthetic_corpus, synthetic_external_scores, SyntheticCorpus,
};
use dexsel_core::corpus::{write_candidates, write_corpus, TargetKind};
use dexsel_core::des::{
    derive_des4_weights, model_mean, select_by_length, select_experts, selection_mean, Criterion, DesConfig,
    LengthSelectConfig, Scope, SelectionResult, PRECALCULATED_METRICS,
};
use dexsel_core::scores::{headline, write_score_rows, MissingPolicy, ScoreTable, OVERALL};
use dexsel_core::Execution;

use super::{create, resolve_strategy, Strategy};
use crate::manifest::RunManifest;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, default_value_t = 200)]
    docs: usize,
    #[arg(long, default_value_t = 4)]
    models: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Strategies to run: des1..des5, `oracle` (true overall score as the
    /// only criterion), or JSON config paths.
    #[arg(long, value_delimiter = ',', default_value = "des1")]
    config: Vec<String>,
    /// Model ranking for des5 (default: ranked on a validation corpus).
    #[arg(long, value_delimiter = ',')]
    ranking: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

struct Validation {
    corpus: SyntheticCorpus,
    table: ScoreTable,
}

fn validation(args: &Args, exec: Execution) -> anyhow::Result<Validation> {
    let seed = args.seed.wrapping_add(1);
    let corpus = generate_synthetic_corpus(args.docs, args.models, seed);
    let table = score_synthetic_corpus(&corpus, seed, exec)?;
    Ok(Validation { corpus, table })
}

fn ensure_validation<'a>(
    valid: &'a mut Option<Validation>,
    args: &Args,
    exec: Execution,
) -> anyhow::Result<&'a Validation> {
    if valid.is_none() {
        *valid = Some(validation(args, exec)?);
    }
    Ok(valid.as_ref().expect("just set"))
}

/// Models ordered by validation headline overall, best first.
fn validation_ranking(v: &Validation) -> anyhow::Result<Vec<String>> {
    let mut scored = Vec::new();
    for m in v.table.models() {
        let bhc = model_mean(&v.table, m, TargetKind::Bhc, OVERALL)?;
        let di = model_mean(&v.table, m, TargetKind::Di, OVERALL)?;
        scored.push((m.clone(), headline(Some(bhc), Some(di)).expect("both present")));
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(scored.into_iter().map(|(m, _)| m).collect())
}

fn run_strategy(
    name: &str,
    args: &Args,
    corpus: &SyntheticCorpus,
    table: &ScoreTable,
    valid: &mut Option<Validation>,
    exec: Execution,
) -> anyhow::Result<[SelectionResult; 2]> {
    let weighted = |config: &DesConfig| -> anyhow::Result<[SelectionResult; 2]> {
        per_target(|t| select_experts(table, config, t, MissingPolicy::Strict, exec))
    };
    if name == "oracle" {
        return weighted(&DesConfig::new(
            "oracle",
            vec![Criterion::new(OVERALL, 1.0, Scope::Both)],
        )?);
    }
    match resolve_strategy(name)? {
        Strategy::Weighted(config) => weighted(&config),
        Strategy::Des4 => {
            let v = ensure_validation(valid, args, exec)?;
            let metrics: Vec<&str> = PRECALCULATED_METRICS.to_vec();
            let config = derive_des4_weights(&v.table, &v.table, OVERALL, &metrics, Pooling::Pooled)?;
            eprintln!("des4 weights (validation, {} candidates):", v.corpus.candidates.len());
            for c in &config.criteria {
                eprintln!("  {:<14} {:+.4}", c.metric, c.weight);
            }
            weighted(&config)
        }
        Strategy::Length => {
            let ranking = if args.ranking.is_empty() {
                validation_ranking(ensure_validation(valid, args, exec)?)?
            } else {
                args.ranking.clone()
            };
            let cfg = LengthSelectConfig::new(ranking);
            per_target(|t| select_by_length(&corpus.candidates, t, &cfg))
        }
    }
}

fn per_target<T>(f: impl Fn(TargetKind) -> dexsel_core::Result<T>) -> anyhow::Result<[T; 2]> {
    let [a, b] = TargetKind::ALL.map(f);
    Ok([a?, b?])
}

pub fn run(args: Args) -> anyhow::Result<()> {
    if args.docs == 0 || args.models == 0 {
        bail!("--docs and --models must be at least 1");
    }
    let mut manifest = RunManifest::new(
        "simulate",
        serde_json::json!({
            "docs": args.docs,
            "models": args.models,
            "seed": args.seed,
            "config": args.config,
            "ranking": args.ranking,
        }),
    );
    let exec = Execution::default();
    let corpus = generate_synthetic_corpus(args.docs, args.models, args.seed);
    let table = score_synthetic_corpus(&corpus, args.seed, exec)?;

    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut emit = |name: &str, write: &dyn Fn(&mut dyn Write) -> anyhow::Result<()>| -> anyhow::Result<()> {
        let path = args.out.join(name);
        let mut w = create(&path)?;
        write(&mut w)?;
        w.flush()?;
        manifest.output(&path);
        Ok(())
    };
    emit("corpus.jsonl", &|w| Ok(write_corpus(w, &corpus.summaries)?))?;
    emit("candidates.jsonl", &|w| Ok(write_candidates(w, &corpus.candidates)?))?;
    emit("external.csv", &|w| {
        let rows = synthetic_external_scores(&corpus.summaries, &corpus.candidates, args.seed, exec);
        Ok(write_score_rows(w, rows)?)
    })?;
    emit("scores.csv", &|w| Ok(table.write_csv(w)?))?;

    let mut board: Vec<(String, f64, f64)> = Vec::new();
    let mut valid = None;
    for name in &args.config {
        let [bhc, di] = run_strategy(name, &args, &corpus, &table, &mut valid, exec)?;
        board.push((
            name.clone(),
            selection_mean(&table, &bhc, OVERALL)?,
            selection_mean(&table, &di, OVERALL)?,
        ));
    }
    for m in 0..args.models {
        let id = model_id(m);
        board.push((
            id.clone(),
            model_mean(&table, &id, TargetKind::Bhc, OVERALL)?,
            model_mean(&table, &id, TargetKind::Di, OVERALL)?,
        ));
    }

    emit("leaderboard.csv", &|w| {
        writeln!(w, "strategy,bhc,di,headline")?;
        for (name, bhc, di) in &board {
            writeln!(w, "{name},{bhc},{di},{}", (bhc + di) / 2.0)?;
        }
        Ok(())
    })?;

    let mut sorted = board.clone();
    sorted.sort_by(|a, b| (b.1 + b.2).total_cmp(&(a.1 + a.2)));
    let mut out = std::io::stdout().lock();
    writeln!(out, "{:<16} {:>8} {:>8} {:>8}", "strategy", "bhc", "di", "overall")?;
    for (name, bhc, di) in &sorted {
        writeln!(out, "{name:<16} {bhc:>8.4} {di:>8.4} {:>8.4}", (bhc + di) / 2.0)?;
    }
    manifest.write(&args.out.join("simulate.manifest.json"))
}
