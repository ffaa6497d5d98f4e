use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::ValueEnum;
use dexsel_core::corpus::{load_corpus_with, load_targets, TargetKind};
use dexsel_core::reorder::{
    rank_corpus, split_sections, truncate_words, ExternalSectionScores, GlobalRanking, Rouge1Scorer, SectionedDocument,
    SimilarityScorer, DEFAULT_BUDGET,
};
use dexsel_core::scores::References;
use dexsel_core::Execution;
use serde::Serialize;

use super::extract::load_headers;
use super::{create, Target};
use crate::manifest::{sibling, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScorerKind {
    Rouge1,
    External,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    #[default]
    Global,
    PerDoc,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    corpus: PathBuf,
    /// Targets JSONL used as the relevance reference.
    #[arg(long)]
    reference_targets: Option<PathBuf>,
    /// Which target section the sections are compared with.
    #[arg(long, value_enum, default_value = "bhc")]
    target: Target,
    #[arg(long, value_enum, default_value = "rouge1")]
    scorer: ScorerKind,
    /// `hadm_id,section_index,score` CSV for the external scorer.
    #[arg(long)]
    section_scores: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    mode: Mode,
    /// Apply a previously trained global ranking instead of training one.
    #[arg(long)]
    ranking: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long)]
    headers: Option<PathBuf>,
    /// Reordered, truncated bodies as JSONL.
    #[arg(long)]
    out: PathBuf,
    /// Where a trained global ranking is written (default `<stem>.ranking.json`).
    #[arg(long)]
    ranking_out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Reordered<'a> {
    hadm_id: &'a str,
    sections: Vec<&'a str>,
    text: String,
}

fn scored(
    args: &Args,
    docs: Vec<SectionedDocument>,
    manifest: &mut RunManifest,
) -> anyhow::Result<Vec<SectionedDocument>> {
    let target: TargetKind = args.target.into();
    let scorer: Box<dyn SimilarityScorer> = match args.scorer {
        ScorerKind::Rouge1 => Box::new(Rouge1Scorer),
        ScorerKind::External => {
            let path = args
                .section_scores
                .as_ref()
                .context("--scorer external needs --section-scores")?;
            manifest.input(path)?;
            Box::new(ExternalSectionScores::from_csv(path)?)
        }
    };
    let references = match (&args.reference_targets, args.scorer) {
        (Some(path), _) => {
            manifest.input(path)?;
            Some(References::new(load_targets(path)?))
        }
        (None, ScorerKind::External) => None,
        (None, ScorerKind::Rouge1) => bail!("the rouge1 scorer needs --reference-targets"),
    };
    let texts: Vec<&str> = match &references {
        Some(r) => docs
            .iter()
            .map(|d| {
                r.get(&d.hadm_id, target)
                    .with_context(|| format!("no reference target for {}", d.hadm_id))
            })
            .collect::<anyhow::Result<_>>()?,
        None => vec![""; docs.len()],
    };
    Ok(rank_corpus(docs, &texts, scorer.as_ref(), Execution::default())?)
}

pub fn run(args: Args) -> anyhow::Result<()> {
    if args.budget == 0 {
        bail!("--budget must be at least 1");
    }
    let mut manifest = RunManifest::new(
        "reorder",
        serde_json::json!({
            "target": TargetKind::from(args.target).as_str(),
            "scorer": format!("{:?}", args.scorer),
            "mode": format!("{:?}", args.mode),
            "budget": args.budget,
        }),
    );
    manifest.input(&args.corpus)?;
    let headers = load_headers(args.headers.as_ref())?;
    let corpus = load_corpus_with(&args.corpus, &headers)?;
    let docs: Vec<SectionedDocument> = corpus
        .iter()
        .map(|s| split_sections(&s.hadm_id, &s.body_without_targets, &headers))
        .collect();

    let ordered = match args.mode {
        Mode::PerDoc => scored(&args, docs, &mut manifest)?,
        Mode::Global => {
            let ranking = match &args.ranking {
                Some(path) => {
                    manifest.input(path)?;
                    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    GlobalRanking::from_json(&text)?
                }
                None => {
                    let ranking = GlobalRanking::train(&scored(&args, docs.clone(), &mut manifest)?);
                    let path = args
                        .ranking_out
                        .clone()
                        .unwrap_or_else(|| sibling(&args.out, ".ranking.json"));
                    let mut w = create(&path)?;
                    w.write_all(ranking.to_json().as_bytes())?;
                    w.write_all(b"\n")?;
                    w.flush()?;
                    manifest.output(&path);
                    ranking
                }
            };
            docs.into_iter().map(|d| ranking.apply(d)).collect()
        }
    };

    let mut w = create(&args.out)?;
    for d in &ordered {
        let record = Reordered {
            hadm_id: &d.hadm_id,
            sections: d.keys(),
            text: truncate_words(d, args.budget),
        };
        serde_json::to_writer(&mut w, &record)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    manifest.output(&args.out);
    eprintln!("reordered {} document(s) into {}", ordered.len(), args.out.display());
    manifest.write(&sibling(&args.out, ".manifest.json"))
}
