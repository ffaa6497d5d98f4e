//! Discharge-summary corpora and model candidates: JSONL I/O, target-section
//! extraction, and a seeded synthetic corpus generator.

mod headers;
pub mod synthetic;

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::word_count;

pub use headers::{find_header_lines, HeaderLine, HeaderMatch, HeaderSet, BHC_HEADER, DI_HEADER};
pub use synthetic::{generate_synthetic_corpus, SyntheticCorpus};

/// The two sections a model has to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Bhc,
    Di,
}

impl TargetKind {
    pub const ALL: [TargetKind; 2] = [TargetKind::Bhc, TargetKind::Di];

    pub fn as_str(self) -> &'static str {
        match self {
            TargetKind::Bhc => "bhc",
            TargetKind::Di => "di",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bhc" => Ok(TargetKind::Bhc),
            "di" => Ok(TargetKind::Di),
            other => Err(Error::UnknownTarget(other.to_string())),
        }
    }
}

/// Target sections pulled out of one discharge summary.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedTargets {
    pub hadm_id: String,
    pub bhc: String,
    pub di: String,
}

impl ExtractedTargets {
    pub fn get(&self, target: TargetKind) -> &str {
        match target {
            TargetKind::Bhc => &self.bhc,
            TargetKind::Di => &self.di,
        }
    }
}

/// Result of [`extract_targets`] on a bare text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub bhc: String,
    pub di: String,
    pub body_without_targets: String,
}

/// One hospital encounter's discharge summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DischargeSummary {
    pub hadm_id: String,
    pub full_text: String,
    pub body_without_targets: String,
    pub targets: ExtractedTargets,
}

impl DischargeSummary {
    pub fn new(hadm_id: impl Into<String>, full_text: impl Into<String>, headers: &HeaderSet) -> Self {
        let hadm_id = hadm_id.into();
        let full_text = full_text.into();
        let Extraction {
            bhc,
            di,
            body_without_targets,
        } = extract_targets_with(&full_text, headers);
        DischargeSummary {
            targets: ExtractedTargets {
                hadm_id: hadm_id.clone(),
                bhc,
                di,
            },
            hadm_id,
            full_text,
            body_without_targets,
        }
    }
}

/// Extracts BHC and DI with the shipped header list.
pub fn extract_targets(text: &str) -> Extraction {
    extract_targets_with(text, HeaderSet::shared())
}

/// Each target runs from its header line to the next recognized header line
/// (or the end of the text). The first occurrence of each target header
/// provides the extracted text; every occurrence is removed from the body.
pub fn extract_targets_with(text: &str, headers: &HeaderSet) -> Extraction {
    let lines = find_header_lines(text, headers);
    let mut bhc: Option<String> = None;
    let mut di: Option<String> = None;
    let mut removed: Vec<(usize, usize)> = Vec::new();

    for (k, line) in lines.iter().enumerate() {
        let slot = match line.name {
            BHC_HEADER => &mut bhc,
            DI_HEADER => &mut di,
            _ => continue,
        };
        let end = lines.get(k + 1).map_or(text.len(), |next| next.line_start);
        if slot.is_none() {
            *slot = Some(text[line.content_start..end].trim().to_string());
        }
        removed.push((line.line_start, end));
    }

    let mut body = String::with_capacity(text.len());
    let mut cursor = 0;
    for (start, end) in removed {
        body.push_str(&text[cursor..start]);
        cursor = end;
    }
    body.push_str(&text[cursor..]);

    Extraction {
        bhc: bhc.unwrap_or_default(),
        di: di.unwrap_or_default(),
        body_without_targets: body,
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CorpusRecord {
    hadm_id: String,
    discharge_summary: String,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

/// Non-blank lines of a JSONL file with their 1-based line numbers.
fn jsonl_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<DischargeSummary>> {
    load_corpus_with(path, HeaderSet::shared())
}

pub fn load_corpus_with(path: impl AsRef<Path>, headers: &HeaderSet) -> Result<Vec<DischargeSummary>> {
    let path = path.as_ref();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (line_no, line) in jsonl_lines(path)? {
        let record: CorpusRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        if record.hadm_id.is_empty() {
            return Err(Error::parse(path, line_no, "empty hadm_id"));
        }
        if let Some(&first) = seen.get(&record.hadm_id) {
            return Err(Error::DuplicateDocument {
                id: record.hadm_id,
                first,
                second: line_no,
            });
        }
        seen.insert(record.hadm_id.clone(), line_no);
        out.push(DischargeSummary::new(record.hadm_id, record.discharge_summary, headers));
    }
    Ok(out)
}

pub fn write_corpus<W: Write>(mut w: W, corpus: &[DischargeSummary]) -> std::io::Result<()> {
    for s in corpus {
        let record = CorpusRecord {
            hadm_id: s.hadm_id.clone(),
            discharge_summary: s.full_text.clone(),
        };
        serde_json::to_writer(&mut w, &record)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// One model's output for one (admission, target) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedCandidate {
    pub hadm_id: String,
    pub model_id: String,
    pub target: TargetKind,
    pub text: String,
    /// Whitespace-token count of `text`; always recomputed, never read from input.
    pub word_count: usize,
}

impl GeneratedCandidate {
    pub fn new(
        hadm_id: impl Into<String>,
        model_id: impl Into<String>,
        target: TargetKind,
        text: impl Into<String>,
    ) -> Self {
        let text = text.into();
        GeneratedCandidate {
            hadm_id: hadm_id.into(),
            model_id: model_id.into(),
            target,
            word_count: word_count(&text),
            text,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CandidateRecord {
    hadm_id: String,
    model_id: String,
    target: String,
    text: String,
}

pub fn load_candidates(path: impl AsRef<Path>) -> Result<Vec<GeneratedCandidate>> {
    let path = path.as_ref();
    let mut seen: HashMap<(String, String, TargetKind), usize> = HashMap::new();
    let mut out = Vec::new();
    for (line_no, line) in jsonl_lines(path)? {
        let record: CandidateRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        let target: TargetKind = record
            .target
            .parse()
            .map_err(|e: Error| Error::parse(path, line_no, e.to_string()))?;
        if record.hadm_id.is_empty() || record.model_id.is_empty() {
            return Err(Error::parse(path, line_no, "empty hadm_id or model_id"));
        }
        let key = (record.hadm_id.clone(), record.model_id.clone(), target);
        if let Some(&first) = seen.get(&key) {
            return Err(Error::DuplicateCandidate {
                hadm_id: record.hadm_id,
                model_id: record.model_id,
                target: target.to_string(),
                first,
                second: line_no,
            });
        }
        seen.insert(key, line_no);
        out.push(GeneratedCandidate::new(
            record.hadm_id,
            record.model_id,
            target,
            record.text,
        ));
    }
    Ok(out)
}

pub fn write_candidates<W: Write>(mut w: W, candidates: &[GeneratedCandidate]) -> std::io::Result<()> {
    for c in candidates {
        let record = CandidateRecord {
            hadm_id: c.hadm_id.clone(),
            model_id: c.model_id.clone(),
            target: c.target.to_string(),
            text: c.text.clone(),
        };
        serde_json::to_writer(&mut w, &record)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Loads reference targets written by [`write_targets`] (`hadm_id, bhc, di`).
pub fn load_targets(path: impl AsRef<Path>) -> Result<Vec<ExtractedTargets>> {
    let path = path.as_ref();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (line_no, line) in jsonl_lines(path)? {
        let t: ExtractedTargets =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        if let Some(&first) = seen.get(&t.hadm_id) {
            return Err(Error::DuplicateDocument {
                id: t.hadm_id,
                first,
                second: line_no,
            });
        }
        seen.insert(t.hadm_id.clone(), line_no);
        out.push(t);
    }
    Ok(out)
}

pub fn write_targets<W: Write>(mut w: W, targets: &[ExtractedTargets]) -> std::io::Result<()> {
    for t in targets {
        serde_json::to_writer(&mut w, t)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Groups candidates by document in first-appearance order.
pub fn group_by_document(candidates: &[GeneratedCandidate]) -> Vec<(String, Vec<&GeneratedCandidate>)> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut groups: Vec<(String, Vec<&GeneratedCandidate>)> = Vec::new();
    for c in candidates {
        let slot = *index.entry(c.hadm_id.as_str()).or_insert_with(|| {
            groups.push((c.hadm_id.clone(), Vec::new()));
            groups.len() - 1
        });
        groups[slot].1.push(c);
    }
    groups
}
