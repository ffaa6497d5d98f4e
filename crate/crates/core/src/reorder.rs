//! Section reordering: split a summary body into sections, rank them by
//! relevance to a target text, and truncate the reordered text to a word
//! budget.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{find_header_lines, HeaderSet};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::relevance;

pub const MAX_SECTIONS: usize = 50;
pub const DEFAULT_BUDGET: usize = 2000;
/// Key of the untitled text before the first header.
pub const PREAMBLE: &str = "preamble";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    /// Canonical lowercase header name, or [`PREAMBLE`].
    pub key: String,
    /// Header text as written (empty for the preamble).
    pub header: String,
    pub body: String,
    pub relevance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionedDocument {
    pub hadm_id: String,
    pub sections: Vec<Section>,
}

impl SectionedDocument {
    /// Sections concatenated in their current order. A newline is inserted
    /// where two pieces would otherwise run words together.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for s in &self.sections {
            for piece in [&s.header, &s.body] {
                if piece.is_empty() {
                    continue;
                }
                let glued = out.chars().last().is_some_and(|c| !c.is_whitespace())
                    && piece.chars().next().is_some_and(|c| !c.is_whitespace());
                if glued {
                    out.push('\n');
                }
                out.push_str(piece);
            }
        }
        out
    }

    pub fn keys(&self) -> Vec<&str> {
        self.sections.iter().map(|s| s.key.as_str()).collect()
    }
}

/// Splits `text` at recognized header lines. Text before the first header
/// becomes a preamble section unless it is blank; a document without
/// headers is a single preamble. Sections past the 50th are folded into the
/// 50th, header text included.
pub fn split_sections(hadm_id: &str, text: &str, headers: &HeaderSet) -> SectionedDocument {
    let lines = find_header_lines(text, headers);
    let mut sections = Vec::new();
    let first = lines.first().map_or(text.len(), |l| l.line_start);
    if lines.is_empty() || !text[..first].trim().is_empty() {
        sections.push(Section {
            key: PREAMBLE.to_string(),
            header: String::new(),
            body: text[..first].to_string(),
            relevance: None,
        });
    }
    for (k, line) in lines.iter().enumerate() {
        let end = lines.get(k + 1).map_or(text.len(), |next| next.line_start);
        let header = &text[line.line_start..line.content_start];
        let body = &text[line.content_start..end];
        if sections.len() == MAX_SECTIONS {
            let last = sections.last_mut().expect("non-empty");
            last.body.push_str(header);
            last.body.push_str(body);
        } else {
            sections.push(Section {
                key: line.name.to_string(),
                header: header.to_string(),
                body: body.to_string(),
                relevance: None,
            });
        }
    }
    SectionedDocument {
        hadm_id: hadm_id.to_string(),
        sections,
    }
}

/// Relevance of one section to a reference text; higher is more relevant.
pub trait SimilarityScorer: Sync {
    fn score(&self, hadm_id: &str, index: usize, section: &Section, reference: &str) -> Result<f64>;
}

/// ROUGE-1 F1 between the section body and the reference.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rouge1Scorer;

impl SimilarityScorer for Rouge1Scorer {
    fn score(&self, _: &str, _: usize, section: &Section, reference: &str) -> Result<f64> {
        Ok(relevance::rouge_n(&section.body, reference, 1))
    }
}

/// Precomputed scores keyed by (hadm_id, section index), read from a CSV
/// with header `hadm_id,section_index,score`.
#[derive(Debug, Clone, Default)]
pub struct ExternalSectionScores {
    scores: HashMap<(String, usize), f64>,
}

#[derive(Deserialize)]
struct SectionScoreRecord {
    hadm_id: String,
    section_index: usize,
    score: f64,
}

impl ExternalSectionScores {
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::io(path, e.into()))?;
        let headers = reader.headers().map_err(|e| Error::io(path, e.into()))?;
        if headers.iter().collect::<Vec<_>>() != ["hadm_id", "section_index", "score"] {
            return Err(Error::parse(path, 1, "expected header hadm_id,section_index,score"));
        }
        let mut scores = HashMap::new();
        for record in reader.deserialize::<SectionScoreRecord>() {
            let r = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                Error::parse(path, line, e.to_string())
            })?;
            if !r.score.is_finite() {
                return Err(Error::parse(
                    path,
                    0,
                    format!("non-finite score for ({}, {})", r.hadm_id, r.section_index),
                ));
            }
            if scores.insert((r.hadm_id.clone(), r.section_index), r.score).is_some() {
                return Err(Error::DuplicateCell(format!(
                    "({}, section {})",
                    r.hadm_id, r.section_index
                )));
            }
        }
        Ok(ExternalSectionScores { scores })
    }

    pub fn insert(&mut self, hadm_id: &str, index: usize, score: f64) {
        self.scores.insert((hadm_id.to_string(), index), score);
    }
}

impl SimilarityScorer for ExternalSectionScores {
    fn score(&self, hadm_id: &str, index: usize, _: &Section, _: &str) -> Result<f64> {
        self.scores
            .get(&(hadm_id.to_string(), index))
            .copied()
            .ok_or_else(|| Error::MissingCells(vec![format!("section score ({hadm_id}, {index})")]))
    }
}

/// Sets each section's relevance. Indices refer to the current order.
pub fn score_sections(doc: &mut SectionedDocument, reference: &str, scorer: &dyn SimilarityScorer) -> Result<()> {
    for (i, s) in doc.sections.iter_mut().enumerate() {
        let v = scorer.score(&doc.hadm_id, i, s, reference)?;
        if !v.is_finite() {
            return Err(Error::Degenerate(format!(
                "non-finite relevance for ({}, {i})",
                doc.hadm_id
            )));
        }
        s.relevance = Some(v);
    }
    Ok(())
}

/// Stable sort by relevance, highest first; unscored sections go last.
pub fn sort_by_relevance(doc: &mut SectionedDocument) {
    doc.sections.sort_by(|a, b| match (a.relevance, b.relevance) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
}

pub fn rank_sections(
    mut doc: SectionedDocument,
    reference: &str,
    scorer: &dyn SimilarityScorer,
) -> Result<SectionedDocument> {
    score_sections(&mut doc, reference, scorer)?;
    sort_by_relevance(&mut doc);
    Ok(doc)
}

/// Mean relevance per section key over a training corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GlobalRanking {
    pub mean_relevance: BTreeMap<String, f64>,
}

impl GlobalRanking {
    /// Averages the relevance of scored sections by key, in document order.
    pub fn train(docs: &[SectionedDocument]) -> Self {
        let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for s in docs.iter().flat_map(|d| &d.sections) {
            if let Some(v) = s.relevance {
                let e = sums.entry(s.key.clone()).or_default();
                e.0 += v;
                e.1 += 1;
            }
        }
        GlobalRanking {
            mean_relevance: sums.into_iter().map(|(k, (sum, n))| (k, sum / n as f64)).collect(),
        }
    }

    /// Replaces section relevance with the learned mean for its key and
    /// sorts. Keys never seen in training go last in original order.
    pub fn apply(&self, mut doc: SectionedDocument) -> SectionedDocument {
        for s in &mut doc.sections {
            s.relevance = self.mean_relevance.get(&s.key).copied();
        }
        sort_by_relevance(&mut doc);
        doc
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ranking serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("global ranking: {e}")))
    }
}

/// Scores every document against its reference and sorts each one.
pub fn rank_corpus(
    docs: Vec<SectionedDocument>,
    references: &[&str],
    scorer: &dyn SimilarityScorer,
    exec: Execution,
) -> Result<Vec<SectionedDocument>> {
    assert_eq!(docs.len(), references.len(), "one reference per document");
    let pairs: Vec<(SectionedDocument, &str)> = docs.into_iter().zip(references.iter().copied()).collect();
    exec.try_map(&pairs, |(doc, reference)| rank_sections(doc.clone(), reference, scorer))
}

/// Text up to and including the `budget`-th whitespace-separated word.
/// Shorter texts are returned unchanged.
pub fn truncate_text(text: &str, budget: usize) -> &str {
    if budget == 0 {
        return "";
    }
    let mut words = 0;
    let mut in_word = false;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if in_word && words == budget {
                return &text[..i];
            }
            in_word = false;
        } else if !in_word {
            in_word = true;
            words += 1;
        }
    }
    text
}

pub fn truncate_words(doc: &SectionedDocument, budget: usize) -> String {
    truncate_text(&doc.text(), budget).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::word_count;

    fn headers() -> &'static HeaderSet {
        HeaderSet::shared()
    }

    #[test]
    fn split_with_preamble() {
        let text =
            "Name: ___\nIntro line.\nChief Complaint:\nchest pain\nAllergies: none\nSocial History:\nlives alone\n";
        let doc = split_sections("1", text, headers());
        assert_eq!(
            doc.keys(),
            vec!["name", "chief complaint", "allergies", "social history"]
        );
        assert_eq!(doc.text(), text);

        let text = "Some intro.\nChief Complaint:\nx\nAllergies:\ny\nSocial History:\nz\n";
        let doc = split_sections("1", text, headers());
        assert_eq!(doc.sections.len(), 4);
        assert_eq!(doc.sections[0].key, PREAMBLE);
        assert_eq!(doc.sections[2].header, "Allergies:");
        assert_eq!(doc.text(), text);
    }

    #[test]
    fn no_headers_single_preamble() {
        let doc = split_sections("1", "just text\nmore text", headers());
        assert_eq!(doc.keys(), vec![PREAMBLE]);
    }

    #[test]
    fn overflow_merges_into_fiftieth() {
        let text: String = (0..60).map(|i| format!("Allergies:\nitem {i}\n")).collect();
        let doc = split_sections("1", &text, headers());
        assert_eq!(doc.sections.len(), MAX_SECTIONS);
        assert!(doc.sections[49].body.contains("item 59"));
        assert!(doc.sections[49].body.contains("Allergies:\nitem 50"));
        assert_eq!(doc.text(), text);
    }

    fn with_scores(scores: &[f64]) -> SectionedDocument {
        let text: String = ["Allergies:\na\n", "Social History:\nb\n", "Family History:\nc\n"].concat();
        let mut doc = split_sections("d", &text, headers());
        let mut ext = ExternalSectionScores::default();
        for (i, s) in scores.iter().enumerate() {
            ext.insert("d", i, *s);
        }
        score_sections(&mut doc, "", &ext).unwrap();
        doc
    }

    #[test]
    fn ranking_order_and_stability() {
        let mut doc = with_scores(&[0.2, 0.9, 0.5]);
        sort_by_relevance(&mut doc);
        assert_eq!(doc.keys(), vec!["social history", "family history", "allergies"]);

        let mut doc = with_scores(&[0.5, 0.5, 0.5]);
        sort_by_relevance(&mut doc);
        assert_eq!(doc.keys(), vec!["allergies", "social history", "family history"]);
    }

    #[test]
    fn external_gap_is_an_error() {
        let doc = split_sections("d", "Allergies:\na\nSocial History:\nb\n", headers());
        let mut ext = ExternalSectionScores::default();
        ext.insert("d", 0, 1.0);
        assert!(rank_sections(doc, "", &ext).is_err());
    }

    #[test]
    fn rouge_identity_ranks_first() {
        let text =
            "Allergies:\nalpha beta gamma\nSocial History:\ndelta epsilon zeta\nFamily History:\neta theta iota\n";
        let doc = split_sections("d", text, headers());
        let ranked = rank_sections(doc, "delta epsilon zeta", &Rouge1Scorer).unwrap();
        assert_eq!(ranked.sections[0].key, "social history");
        assert_eq!(ranked.sections[0].relevance, Some(1.0));
    }

    #[test]
    fn reordered_text_keeps_words_apart() {
        let text = "Allergies:\na b\nSocial History:\nc d";
        let mut doc = split_sections("d", text, headers());
        doc.sections.reverse();
        assert_eq!(word_count(&doc.text()), word_count(text));
    }

    #[test]
    fn global_ranking_differs_from_per_document() {
        let train: Vec<SectionedDocument> = [[0.9, 0.1], [0.8, 0.2]]
            .iter()
            .map(|s| {
                let mut d = split_sections("t", "Allergies:\na\nSocial History:\nb\n", headers());
                d.sections[0].relevance = Some(s[0]);
                d.sections[1].relevance = Some(s[1]);
                d
            })
            .collect();
        let ranking = GlobalRanking::train(&train);
        assert!((ranking.mean_relevance["allergies"] - 0.85).abs() < 1e-12);
        assert_eq!(GlobalRanking::from_json(&ranking.to_json()).unwrap(), ranking);

        let test = split_sections("x", "Allergies:\nfoo\nSocial History:\nbar\nLabs:\nbaz\n", headers());
        let global = ranking.apply(test.clone());
        assert_eq!(global.keys(), vec!["allergies", "social history", "labs"]);
        let per_doc = rank_sections(test, "bar", &Rouge1Scorer).unwrap();
        assert_eq!(per_doc.keys()[0], "social history");
    }

    #[test]
    fn truncation() {
        let long: String = (0..2500).map(|i| format!("w{i} ")).collect();
        assert_eq!(word_count(truncate_text(&long, 2000)), 2000);
        let short: String = (0..1200).map(|i| format!("w{i}\n")).collect();
        assert_eq!(truncate_text(&short, 2000), short);
        assert_eq!(truncate_text("  one two three", 1), "  one");
        assert_eq!(truncate_text("one", 1), "one");
    }

    #[test]
    fn corpus_ranking_matches_sequential() {
        let docs: Vec<SectionedDocument> = (0..8)
            .map(|i| {
                split_sections(
                    &i.to_string(),
                    "Allergies:\na b\nSocial History:\nc d\nLabs:\na d\n",
                    headers(),
                )
            })
            .collect();
        let refs = vec!["a d"; 8];
        let par = rank_corpus(docs.clone(), &refs, &Rouge1Scorer, Execution::Parallel).unwrap();
        let seq = rank_corpus(docs, &refs, &Rouge1Scorer, Execution::Sequential).unwrap();
        assert_eq!(par, seq);
        assert_eq!(par[0].sections[0].key, "labs");
    }
}
