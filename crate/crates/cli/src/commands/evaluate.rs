use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use dexsel_core::corpus::{load_targets, GeneratedCandidate, TargetKind};
use dexsel_core::des::read_submission;
use dexsel_core::scores::{
    add_overall_column, compute_native_scores, headline, read_score_file, MergeMode, NativeMetric, References,
    ScoreRow, ScoreTable, OVERALL,
};
use dexsel_core::Execution;
use serde::Deserialize;

use super::{create, target_path, Policy};
use crate::manifest::{sibling, RunManifest};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// `bhc=PATH` or `di=PATH` submission CSV (repeatable).
    #[arg(long, value_parser = target_path, required = true)]
    submission: Vec<(TargetKind, PathBuf)>,
    /// Targets JSONL holding the reference texts.
    #[arg(long)]
    references: PathBuf,
    /// Externally computed scores (long-form CSV). Rows count for the
    /// submission when their model_id is `--name`, or the chosen model of
    /// a `--selection` record.
    #[arg(long)]
    external: Vec<PathBuf>,
    /// `bhc=PATH` / `di=PATH` selection record written by `select`.
    #[arg(long, value_parser = target_path)]
    selection: Vec<(TargetKind, PathBuf)>,
    /// Model id under which the submission is reported.
    #[arg(long, default_value = "submission")]
    name: String,
    #[arg(long, value_enum, default_value_t)]
    policy: Policy,
    /// Per-document report CSV; corpus means go to `<stem>.summary.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Deserialize)]
struct SelectionChoice {
    hadm_id: String,
    model_id: String,
}

#[derive(Deserialize)]
struct SelectionFile {
    choices: Vec<SelectionChoice>,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let mut seen = BTreeSet::new();
    for (t, _) in &args.submission {
        if !seen.insert(*t) {
            bail!("more than one submission for {t}");
        }
    }
    let mut manifest = RunManifest::new(
        "evaluate",
        serde_json::json!({
            "targets": args.submission.iter().map(|(t, _)| t.as_str()).collect::<Vec<_>>(),
            "name": args.name,
            "policy": format!("{:?}", args.policy),
            "external": args.external.len(),
        }),
    );
    manifest.input(&args.references)?;
    let targets = load_targets(&args.references)?;
    let reference_ids: Vec<&str> = targets.iter().map(|t| t.hadm_id.as_str()).collect();
    let reference_set: BTreeSet<&str> = reference_ids.iter().copied().collect();

    let mut candidates = Vec::new();
    for (target, path) in &args.submission {
        manifest.input(path)?;
        let rows = read_submission(path)?;
        let ids: BTreeSet<&str> = rows.iter().map(|(id, _)| id.as_str()).collect();
        let unknown: Vec<&str> = ids.difference(&reference_set).copied().collect();
        if !unknown.is_empty() {
            bail!(
                "{}: hadm_id(s) not in references: {}",
                path.display(),
                unknown.join(", ")
            );
        }
        let missing: Vec<&str> = reference_set.difference(&ids).copied().collect();
        if !missing.is_empty() {
            bail!(
                "{}: no {target} submission for hadm_id(s): {}",
                path.display(),
                missing.join(", ")
            );
        }
        let by_id: HashMap<&str, &str> = rows.iter().map(|(id, text)| (id.as_str(), text.as_str())).collect();
        for id in &reference_ids {
            candidates.push(GeneratedCandidate::new(*id, args.name.as_str(), *target, by_id[id]));
        }
    }

    let mut chosen: HashMap<(TargetKind, String), String> = HashMap::new();
    for (target, path) in &args.selection {
        manifest.input(path)?;
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let record: SelectionFile =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        for c in record.choices {
            chosen.insert((*target, c.hadm_id), c.model_id);
        }
    }

    let references = References::new(targets.iter().cloned());
    let mut table = compute_native_scores(
        &candidates,
        &references,
        &NativeMetric::REFERENCE_BASED,
        Execution::default(),
    )?;
    if table.documents().is_empty() {
        table = ScoreTable::new(Vec::new(), vec![args.name.clone()])?;
    }
    let submitted: BTreeSet<TargetKind> = args.submission.iter().map(|(t, _)| *t).collect();
    for path in &args.external {
        manifest.input(path)?;
        let rows: Vec<ScoreRow> = read_score_file(path)?
            .into_iter()
            .filter(|r| submitted.contains(&r.target))
            .filter(|r| {
                r.model_id == args.name
                    || chosen
                        .get(&(r.target, r.hadm_id.clone()))
                        .is_some_and(|m| *m == r.model_id)
            })
            .map(|r| ScoreRow {
                model_id: args.name.clone(),
                ..r
            })
            .collect();
        table.merge_rows(&rows, MergeMode::External)?;
    }
    add_overall_column(&mut table, args.policy.into())?;

    let mut w = create(&args.out)?;
    table.write_csv(&mut w)?;
    w.flush()?;
    manifest.output(&args.out);

    let mut summary: BTreeMap<TargetKind, Vec<(String, f64, usize)>> = BTreeMap::new();
    for target in &submitted {
        for metric in table.metrics() {
            let values: Vec<f64> = table
                .column(metric)
                .into_iter()
                .filter(|(c, _)| c.target == *target)
                .map(|(_, v)| v)
                .collect();
            if let Some(m) = mean(&values) {
                summary
                    .entry(*target)
                    .or_default()
                    .push((metric.clone(), m, values.len()));
            }
        }
    }
    let overall_of = |t: TargetKind| {
        summary
            .get(&t)
            .and_then(|rows| rows.iter().find(|(m, _, _)| m == OVERALL).map(|r| r.1))
    };
    let head = headline(overall_of(TargetKind::Bhc), overall_of(TargetKind::Di));

    let summary_path = sibling(&args.out, ".summary.csv");
    let mut w = create(&summary_path)?;
    writeln!(w, "target,metric,mean,n")?;
    for (target, rows) in &summary {
        for (metric, m, n) in rows {
            writeln!(w, "{target},{metric},{m},{n}")?;
        }
    }
    if let Some(h) = head {
        writeln!(w, "all,{OVERALL},{h},{}", submitted.len())?;
    }
    w.flush()?;
    manifest.output(&summary_path);

    let mut stdout = std::io::stdout().lock();
    for (target, rows) in &summary {
        writeln!(stdout, "{target}")?;
        for (metric, m, n) in rows {
            writeln!(stdout, "  {metric:<14} {m:>8.4}  (n={n})")?;
        }
    }
    match head {
        Some(h) => writeln!(stdout, "headline overall: {h:.4}")?,
        None => writeln!(stdout, "headline overall: unavailable (missing metrics)")?,
    }
    manifest.write(&sibling(&args.out, ".manifest.json"))
}
