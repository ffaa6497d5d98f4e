//! Subcommand implementations and the argument types they share.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::ValueEnum;
use dexsel_core::analysis::Pooling;
use dexsel_core::corpus::{GeneratedCandidate, TargetKind};
use dexsel_core::des::DesConfig;
use dexsel_core::scores::{read_score_file, MergeMode, MissingPolicy, ScoreRow, ScoreTable};

pub mod correlate;
pub mod evaluate;
pub mod extract;
pub mod reorder;
pub mod score;
pub mod select;
pub mod simulate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Bhc,
    Di,
}

impl From<Target> for TargetKind {
    fn from(t: Target) -> Self {
        match t {
            Target::Bhc => TargetKind::Bhc,
            Target::Di => TargetKind::Di,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    #[default]
    Strict,
    Lenient,
}

impl From<Policy> for MissingPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Strict => MissingPolicy::Strict,
            Policy::Lenient => MissingPolicy::Lenient,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum PoolingArg {
    #[default]
    Pooled,
    PerTarget,
}

impl From<PoolingArg> for Pooling {
    fn from(p: PoolingArg) -> Self {
        match p {
            PoolingArg::Pooled => Pooling::Pooled,
            PoolingArg::PerTarget => Pooling::PerTarget,
        }
    }
}

/// Parses `bhc=PATH` / `di=PATH`.
pub fn target_path(s: &str) -> Result<(TargetKind, PathBuf), String> {
    let (t, p) = s
        .split_once('=')
        .ok_or_else(|| format!("expected TARGET=PATH, got {s:?}"))?;
    let t: TargetKind = t.parse().map_err(|e: dexsel_core::Error| e.to_string())?;
    if p.is_empty() {
        return Err("empty path".into());
    }
    Ok((t, PathBuf::from(p)))
}

pub fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn load_rows(paths: &[PathBuf]) -> anyhow::Result<Vec<ScoreRow>> {
    let mut rows = Vec::new();
    for p in paths {
        rows.extend(read_score_file(p)?);
    }
    Ok(rows)
}

/// A table indexed by the candidates' documents and models (file order),
/// filled with `rows`.
pub fn table_for(candidates: &[GeneratedCandidate], rows: &[ScoreRow]) -> anyhow::Result<ScoreTable> {
    let mut table = ScoreTable::from_candidates(candidates);
    table.merge_rows(rows, MergeMode::Any)?;
    Ok(table)
}

/// A `--config` value: a weighted preset or JSON file, the derived
/// correlation preset, or the length-window preset.
pub enum Strategy {
    Weighted(DesConfig),
    Des4,
    Length,
}

pub fn resolve_strategy(spec: &str) -> anyhow::Result<Strategy> {
    match spec {
        "des4" => return Ok(Strategy::Des4),
        "des5" => return Ok(Strategy::Length),
        _ => {}
    }
    if let Some(c) = DesConfig::preset(spec) {
        return Ok(Strategy::Weighted(c));
    }
    let path = Path::new(spec);
    if !path.exists() {
        bail!("unknown DES preset or config file {spec:?} (presets: des1..des5)");
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Strategy::Weighted(DesConfig::from_json(&text)?))
}
