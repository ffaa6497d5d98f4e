use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use dexsel_core::corpus::{load_corpus_with, write_targets, ExtractedTargets, HeaderSet};
use serde::Serialize;

use super::create;
use crate::manifest::RunManifest;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// JSONL with `hadm_id` and `discharge_summary`.
    #[arg(long)]
    corpus: PathBuf,
    /// Extra known headers, one per line.
    #[arg(long)]
    headers: Option<PathBuf>,
    /// Output directory for targets.jsonl and bodies.jsonl.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct BodyRecord<'a> {
    hadm_id: &'a str,
    body: &'a str,
}

pub fn load_headers(path: Option<&PathBuf>) -> anyhow::Result<HeaderSet> {
    match path {
        None => Ok(HeaderSet::shared().clone()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let mut list: String = HeaderSet::shared().iter().collect::<Vec<_>>().join("\n");
            list.push('\n');
            list.push_str(&text);
            Ok(HeaderSet::from_list(&list))
        }
    }
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let mut manifest = RunManifest::new(
        "extract",
        serde_json::json!({ "headers": args.headers.as_ref().map(|p| p.display().to_string()) }),
    );
    manifest.input(&args.corpus)?;
    if let Some(h) = &args.headers {
        manifest.input(h)?;
    }
    let headers = load_headers(args.headers.as_ref())?;
    let corpus = load_corpus_with(&args.corpus, &headers)?;

    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let targets_path = args.out.join("targets.jsonl");
    let targets: Vec<ExtractedTargets> = corpus.iter().map(|s| s.targets.clone()).collect();
    let mut w = create(&targets_path)?;
    write_targets(&mut w, &targets)?;
    w.flush()?;
    manifest.output(&targets_path);

    let bodies_path = args.out.join("bodies.jsonl");
    let mut w = create(&bodies_path)?;
    for s in &corpus {
        serde_json::to_writer(
            &mut w,
            &BodyRecord {
                hadm_id: &s.hadm_id,
                body: &s.body_without_targets,
            },
        )?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    manifest.output(&bodies_path);

    let empty = targets.iter().filter(|t| t.bhc.is_empty() || t.di.is_empty()).count();
    if empty > 0 {
        eprintln!("note: {empty} document(s) lack a BHC or DI section");
    }
    eprintln!("extracted {} document(s) into {}", corpus.len(), args.out.display());
    manifest.write(&args.out.join("extract.manifest.json"))
}
