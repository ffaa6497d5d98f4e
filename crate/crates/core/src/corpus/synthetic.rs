//! Seeded synthetic corpora for tests, benchmarks, and the `simulate` demo.
//!
//! Every document gets its own ChaCha stream, so output does not depend on
//! the execution strategy. Candidates copy a reference word at each position
//! with a per-(document, model) probability; words beyond the reference
//! length are filler, which makes long candidates less precise.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use std::collections::HashMap;

use super::{DischargeSummary, GeneratedCandidate, HeaderSet, TargetKind};
use crate::error::Result;
use crate::exec::Execution;
use crate::relevance::rouge_n;
use crate::scores::{
    add_overall_column, compute_factuality_proxies, compute_native_scores, merge_tables, MergeMode, MissingPolicy,
    NativeMetric, References, ScoreRow, ScoreTable,
};

const WORD_POOL: &[&str] = &[
    "patient",
    "was",
    "admitted",
    "with",
    "chest",
    "pain",
    "and",
    "shortness",
    "of",
    "breath",
    "the",
    "he",
    "she",
    "had",
    "history",
    "hypertension",
    "diabetes",
    "kidney",
    "disease",
    "heart",
    "failure",
    "fever",
    "cough",
    "pneumonia",
    "treated",
    "antibiotics",
    "improved",
    "stable",
    "home",
    "discharged",
    "follow",
    "up",
    "with",
    "doctor",
    "in",
    "one",
    "week",
    "take",
    "your",
    "medications",
    "as",
    "prescribed",
    "call",
    "if",
    "you",
    "have",
    "any",
    "new",
    "symptoms",
    "return",
    "to",
    "hospital",
    "blood",
    "pressure",
    "sugar",
    "levels",
    "were",
    "monitored",
    "daily",
    "weight",
    "swelling",
    "legs",
    "improved",
    "after",
    "diuresis",
    "lasix",
    "dose",
    "increased",
    "decreased",
    "infection",
    "urinary",
    "tract",
    "culture",
    "grew",
    "sensitive",
    "ceftriaxone",
    "transitioned",
    "oral",
    "course",
    "complete",
    "days",
    "echocardiogram",
    "showed",
    "ejection",
    "fraction",
    "normal",
    "mild",
    "moderate",
    "severe",
    "anemia",
    "transfused",
    "units",
    "hemoglobin",
    "remained",
    "above",
    "seven",
    "no",
    "signs",
    "bleeding",
    "colonoscopy",
    "outpatient",
    "recommended",
    "insulin",
    "sliding",
    "scale",
    "metformin",
    "held",
    "restarted",
    "creatinine",
    "baseline",
    "acute",
    "injury",
    "resolved",
    "fluids",
    "physical",
    "therapy",
    "evaluated",
    "walker",
    "rehab",
    "facility",
    "family",
    "meeting",
    "goals",
    "care",
    "discussed",
    "oxygen",
    "saturation",
    "room",
    "air",
    "nebulizers",
    "steroids",
    "taper",
    "prednisone",
    "please",
    "avoid",
    "heavy",
    "lifting",
    "eat",
    "low",
    "salt",
    "diet",
    "drink",
    "water",
    "walk",
    "every",
    "day",
    "keep",
    "appointments",
    "primary",
    "cardiology",
    "clinic",
    "scheduled",
    "tuesday",
    "morning",
    "results",
    "pending",
    "will",
    "be",
    "contacted",
    "dizziness",
    "nausea",
    "vomiting",
    "abdominal",
    "tenderness",
    "imaging",
    "unremarkable",
    "scan",
    "ultrasound",
    "catheter",
    "removed",
    "tolerated",
    "procedure",
    "well",
    "wound",
    "clean",
    "dry",
    "dressing",
    "change",
    "twice",
    "shower",
    "allowed",
    "bathing",
    "swimming",
    "weeks",
];

const FILLER_POOL: &[&str] = &[
    "additionally",
    "furthermore",
    "noted",
    "again",
    "continue",
    "monitor",
    "repeat",
    "observed",
    "unclear",
    "possibly",
    "related",
    "consider",
    "reassess",
    "overall",
    "general",
    "otherwise",
];

/// Mean reference lengths in whitespace words: DI about 196, BHC about 328.
pub const DI_MEAN_WORDS: f64 = 196.3;
pub const BHC_MEAN_WORDS: f64 = 327.6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticCorpus {
    pub summaries: Vec<DischargeSummary>,
    pub candidates: Vec<GeneratedCandidate>,
}

pub fn model_id(m: usize) -> String {
    format!("model_{}", m + 1)
}

fn doc_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn sample_len(rng: &mut impl Rng, mean: f64, sd: f64, min: usize) -> usize {
    let n = Normal::new(mean, sd).expect("valid normal").sample(rng);
    (n.round().max(min as f64)) as usize
}

fn topic_words(rng: &mut impl Rng) -> Vec<&'static str> {
    WORD_POOL.choose_multiple(rng, 40).copied().collect()
}

fn draw_words(rng: &mut impl Rng, topic: &[&'static str], n: usize) -> Vec<&'static str> {
    (0..n)
        .map(|_| {
            if rng.random_bool(0.7) {
                *topic.choose(rng).expect("non-empty")
            } else {
                *WORD_POOL.choose(rng).expect("non-empty")
            }
        })
        .collect()
}

/// Joins words into capitalized sentences of 6-16 words ending in a period.
/// The whitespace word count equals `words.len()`.
fn sentences(rng: &mut impl Rng, words: &[&str]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < words.len() {
        let len = rng.random_range(6..=16).min(words.len() - i);
        for (k, w) in words[i..i + len].iter().enumerate() {
            if !out.is_empty() {
                out.push(' ');
            }
            if k == 0 {
                let mut cs = w.chars();
                if let Some(c) = cs.next() {
                    out.extend(c.to_uppercase());
                    out.push_str(cs.as_str());
                }
            } else {
                out.push_str(w);
            }
        }
        out.push('.');
        i += len;
    }
    out
}

fn candidate_words(
    rng: &mut impl Rng,
    reference: &[&'static str],
    topic: &[&'static str],
    quality: f64,
    len: usize,
) -> Vec<&'static str> {
    (0..len)
        .map(|j| {
            if j < reference.len() && rng.random_bool(quality) {
                reference[j]
            } else if j < reference.len() && rng.random_bool(0.5) {
                *topic.choose(rng).expect("non-empty")
            } else {
                *FILLER_POOL.choose(rng).expect("non-empty")
            }
        })
        .collect()
}

struct Generated {
    summary: DischargeSummary,
    candidates: Vec<GeneratedCandidate>,
}

fn generate_document(doc: usize, n_models: usize, seed: u64, headers: &HeaderSet) -> Generated {
    let mut rng = doc_rng(seed, doc as u64);
    let hadm_id = format!("{}", 20_000_000 + doc);
    let topic = topic_words(&mut rng);

    let bhc_len = sample_len(&mut rng, BHC_MEAN_WORDS, 70.0, 40);
    let bhc_words = draw_words(&mut rng, &topic, bhc_len);
    let di_len = sample_len(&mut rng, DI_MEAN_WORDS, 45.0, 30);
    let di_words = draw_words(&mut rng, &topic, di_len);

    let mut text = String::new();
    text.push_str("Admission Date: ___\nDischarge Date: ___\n\nService: MEDICINE\n\n");
    for header in ["Chief Complaint", "History of Present Illness", "Pertinent Results"] {
        let n = rng.random_range(30..120);
        let words = draw_words(&mut rng, &topic, n);
        let body = sentences(&mut rng, &words);
        text.push_str(&format!("{header}:\n{body}\n\n"));
    }
    let bhc = sentences(&mut rng, &bhc_words);
    text.push_str(&format!("Brief Hospital Course:\n{bhc}\n\n"));
    let n = rng.random_range(10..40);
    let meds_words = draw_words(&mut rng, &topic, n);
    let meds = sentences(&mut rng, &meds_words);
    text.push_str(&format!("Discharge Medications:\n{meds}\n\n"));
    let di = sentences(&mut rng, &di_words);
    text.push_str(&format!("Discharge Instructions:\n{di}\n\n"));
    text.push_str("Followup Instructions:\n___\n");

    let summary = DischargeSummary::new(hadm_id.clone(), text, headers);

    let mut candidates = Vec::with_capacity(2 * n_models);
    for m in 0..n_models {
        // Small per-model offsets, large per-document noise: no model dominates.
        let base = 0.5 + 0.04 * ((m % 4) as f64 - 1.5);
        for (target, reference, mean, sd) in [
            (TargetKind::Bhc, &bhc_words, BHC_MEAN_WORDS, 90.0),
            (TargetKind::Di, &di_words, DI_MEAN_WORDS, 55.0),
        ] {
            let quality = (base + Normal::new(0.0, 0.18).expect("valid").sample(&mut rng)).clamp(0.05, 0.95);
            let len = sample_len(&mut rng, mean, sd, 20);
            let words = candidate_words(&mut rng, reference, &topic, quality, len);
            let text = sentences(&mut rng, &words);
            candidates.push(GeneratedCandidate::new(hadm_id.clone(), model_id(m), target, text));
        }
    }
    Generated { summary, candidates }
}

/// Deterministic synthetic corpus of `n_docs` summaries with `n_models`
/// candidates per (document, target).
pub fn generate_synthetic_corpus(n_docs: usize, n_models: usize, seed: u64) -> SyntheticCorpus {
    generate_synthetic_corpus_with(n_docs, n_models, seed, Execution::default())
}

pub fn generate_synthetic_corpus_with(n_docs: usize, n_models: usize, seed: u64, exec: Execution) -> SyntheticCorpus {
    let headers = HeaderSet::shared();
    let docs = exec.map_range(n_docs, |d| generate_document(d, n_models, seed, headers));
    let mut summaries = Vec::with_capacity(n_docs);
    let mut candidates = Vec::with_capacity(n_docs * n_models * 2);
    for g in docs {
        summaries.push(g.summary);
        candidates.extend(g.candidates);
    }
    SyntheticCorpus { summaries, candidates }
}

/// Metrics that the synthetic external-score generator emits, standing in
/// for model-based scorers this crate does not run.
pub const SYNTHETIC_EXTERNAL_METRICS: [&str; 6] = [
    "bertscore",
    "alignscore",
    "medcon",
    "summac_ds",
    "alignscore_ds",
    "medcon_ds",
];

fn noisy(rng: &mut impl Rng, base: f64, sd: f64) -> f64 {
    (base + Normal::new(0.0, sd).expect("valid").sample(rng)).clamp(0.0, 1.0)
}

/// Seeded stand-ins for model-based scores: each value is a noisy affine
/// function of ROUGE-1 against the reference (plain names) or against the
/// summary body (`_ds` names). Candidates must belong to `summaries`.
pub fn synthetic_external_scores(
    summaries: &[DischargeSummary],
    candidates: &[GeneratedCandidate],
    seed: u64,
    exec: Execution,
) -> Vec<ScoreRow> {
    let by_id: HashMap<&str, &DischargeSummary> = summaries.iter().map(|s| (s.hadm_id.as_str(), s)).collect();
    let indexed: Vec<(usize, &GeneratedCandidate)> = candidates.iter().enumerate().collect();
    let per_candidate = exec.map(&indexed, |&(i, c)| {
        let summary = by_id[c.hadm_id.as_str()];
        let mut rng = doc_rng(seed ^ 0x005e_ed0f_e7e7, i as u64);
        let r = rouge_n(&c.text, summary.targets.get(c.target), 1);
        let r_ds = rouge_n(&c.text, &summary.body_without_targets, 1);
        let values = [
            noisy(&mut rng, 0.55 + 0.4 * r, 0.02),
            noisy(&mut rng, 0.1 + 0.6 * r, 0.05),
            noisy(&mut rng, 0.05 + 0.8 * r, 0.05),
            noisy(&mut rng, 0.2 + 0.5 * r_ds, 0.05),
            noisy(&mut rng, 0.1 + 0.6 * r_ds, 0.05),
            noisy(&mut rng, 0.05 + 0.8 * r_ds, 0.05),
        ];
        SYNTHETIC_EXTERNAL_METRICS
            .iter()
            .zip(values)
            .map(|(m, value)| ScoreRow {
                hadm_id: c.hadm_id.clone(),
                model_id: c.model_id.clone(),
                target: c.target,
                metric: m.to_string(),
                value,
            })
            .collect::<Vec<_>>()
    });
    per_candidate.into_iter().flatten().collect()
}

/// Full score table for a synthetic corpus: every native metric against
/// the reference targets, METEOR against the summary body, the synthetic
/// external scores, and the overall column.
pub fn score_synthetic_corpus(corpus: &SyntheticCorpus, seed: u64, exec: Execution) -> Result<ScoreTable> {
    let references = References::new(corpus.summaries.iter().map(|s| s.targets.clone()));
    let mut table = compute_native_scores(&corpus.candidates, &references, &NativeMetric::ALL, exec)?;
    let ds = compute_factuality_proxies(&corpus.candidates, &corpus.summaries, &[NativeMetric::Meteor], exec)?;
    merge_tables(&mut table, &ds)?;
    let external = synthetic_external_scores(&corpus.summaries, &corpus.candidates, seed, exec);
    table.merge_rows(&external, MergeMode::External)?;
    add_overall_column(&mut table, MissingPolicy::Strict)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::word_count;

    #[test]
    fn deterministic_for_a_seed() {
        let a = generate_synthetic_corpus(20, 3, 7);
        let b = generate_synthetic_corpus_with(20, 3, 7, Execution::Sequential);
        assert_eq!(a, b);
        assert_ne!(a, generate_synthetic_corpus(20, 3, 8));
    }

    #[test]
    fn single_model_cardinality() {
        let c = generate_synthetic_corpus(10, 1, 3);
        assert_eq!(c.candidates.len(), 20);
        for s in &c.summaries {
            for t in TargetKind::ALL {
                let n = c
                    .candidates
                    .iter()
                    .filter(|x| x.hadm_id == s.hadm_id && x.target == t)
                    .count();
                assert_eq!(n, 1);
            }
        }
    }

    #[test]
    fn targets_are_extractable() {
        let c = generate_synthetic_corpus(5, 2, 1);
        for s in &c.summaries {
            assert!(!s.targets.bhc.is_empty());
            assert!(!s.targets.di.is_empty());
            assert!(!s.body_without_targets.contains(&s.targets.bhc));
            assert!(!s.body_without_targets.contains(&s.targets.di));
        }
    }

    #[test]
    fn word_counts_match_text() {
        let c = generate_synthetic_corpus(10, 2, 5);
        for cand in &c.candidates {
            assert_eq!(cand.word_count, word_count(&cand.text));
        }
    }

    #[test]
    fn external_scores_are_deterministic_and_bounded() {
        let c = generate_synthetic_corpus(6, 3, 11);
        let a = synthetic_external_scores(&c.summaries, &c.candidates, 1, Execution::Parallel);
        let b = synthetic_external_scores(&c.summaries, &c.candidates, 1, Execution::Sequential);
        assert_eq!(a, b);
        assert_eq!(a.len(), c.candidates.len() * SYNTHETIC_EXTERNAL_METRICS.len());
        assert!(a.iter().all(|r| (0.0..=1.0).contains(&r.value)));
    }

    #[test]
    fn scored_corpus_has_overall_everywhere() {
        let c = generate_synthetic_corpus(4, 2, 9);
        let t = score_synthetic_corpus(&c, 9, Execution::default()).unwrap();
        assert_eq!(t.column(crate::scores::OVERALL).len(), c.candidates.len());
        assert!(t.has_metric("meteor_ds") && t.has_metric("medcon_ds") && t.has_metric("fkgl"));
    }

    #[test]
    fn mean_lengths_track_corpus_statistics() {
        let c = generate_synthetic_corpus(500, 2, 42);
        let mean = |t: TargetKind| {
            let v: Vec<usize> = c
                .candidates
                .iter()
                .filter(|x| x.target == t)
                .map(|x| x.word_count)
                .collect();
            v.iter().sum::<usize>() as f64 / v.len() as f64
        };
        let di = mean(TargetKind::Di);
        let bhc = mean(TargetKind::Bhc);
        assert!((180.0..=212.0).contains(&di), "DI mean {di}");
        assert!((300.0..=355.0).contains(&bhc), "BHC mean {bhc}");
    }
}
