//! Reference-based relevance metrics: BLEU-4, ROUGE-1/2/L and METEOR.
//!
//! All metrics operate on metric words (see [`crate::textprep::metric_words`])
//! and return values in `[0, 1]`.

mod ngram;
pub mod porter;

use std::collections::HashMap;

use crate::textprep::metric_words;

use ngram::clipped_matches_ids;
pub use ngram::{clipped_matches, ngram_counts};

/// Candidate and reference words mapped to shared integer ids.
pub(crate) struct Interned {
    pub cand: Vec<u32>,
    pub refs: Vec<u32>,
}

fn id_map<'a>(words: &'a [String], ids: &mut HashMap<&'a str, u32>) -> Vec<u32> {
    words
        .iter()
        .map(|w| {
            let next = ids.len() as u32;
            *ids.entry(w.as_str()).or_insert(next)
        })
        .collect()
}

pub(crate) fn intern(candidate: &[String], reference: &[String]) -> Interned {
    let mut ids = HashMap::with_capacity(reference.len());
    let refs = id_map(reference, &mut ids);
    let cand = id_map(candidate, &mut ids);
    Interned { cand, refs }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Sentence-level BLEU-4 with uniform weights.
///
/// Higher-order precisions with zero matches are add-one smoothed in both
/// numerator and denominator, so identical texts shorter than four tokens
/// also score 1.0. A candidate with no unigram matches scores 0.
pub fn bleu4(candidate: &str, reference: &str) -> f64 {
    bleu4_tokens(&metric_words(candidate), &metric_words(reference))
}

pub fn bleu4_tokens(candidate: &[String], reference: &[String]) -> f64 {
    let t = intern(candidate, reference);
    bleu4_ids(&t.cand, &t.refs)
}

pub(crate) fn bleu4_ids(candidate: &[u32], reference: &[u32]) -> f64 {
    let c = candidate.len();
    let r = reference.len();
    if c == 0 || r == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=4 {
        let matches = clipped_matches_ids(candidate, reference, n) as f64;
        let total = c.saturating_sub(n - 1) as f64;
        let p = if n == 1 {
            if matches == 0.0 {
                return 0.0;
            }
            matches / total
        } else if matches == 0.0 {
            1.0 / (total + 1.0)
        } else {
            matches / total
        };
        log_sum += p.ln();
    }
    let brevity = if c < r { (1.0 - r as f64 / c as f64).exp() } else { 1.0 };
    brevity * (log_sum / 4.0).exp()
}

/// ROUGE-N F1 over clipped n-gram overlap.
pub fn rouge_n(candidate: &str, reference: &str, n: usize) -> f64 {
    rouge_n_tokens(&metric_words(candidate), &metric_words(reference), n)
}

pub fn rouge_n_tokens(candidate: &[String], reference: &[String], n: usize) -> f64 {
    assert!(n >= 1, "n-gram order must be positive");
    if n > 4 {
        return rouge_from_matches(candidate.len(), reference.len(), n, || {
            clipped_matches(candidate, reference, n)
        });
    }
    let t = intern(candidate, reference);
    rouge_n_ids(&t.cand, &t.refs, n)
}

pub(crate) fn rouge_n_ids(candidate: &[u32], reference: &[u32], n: usize) -> f64 {
    rouge_from_matches(candidate.len(), reference.len(), n, || {
        clipped_matches_ids(candidate, reference, n)
    })
}

fn rouge_from_matches(c: usize, r: usize, n: usize, matches: impl FnOnce() -> usize) -> f64 {
    let c = c.saturating_sub(n - 1);
    let r = r.saturating_sub(n - 1);
    if c == 0 || r == 0 {
        return 0.0;
    }
    let m = matches() as f64;
    f1(m / c as f64, m / r as f64)
}

/// Length of the longest common subsequence, using two rolling rows.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut prev = vec![0usize; short.len() + 1];
    let mut cur = vec![0usize; short.len() + 1];
    for x in long {
        for (j, y) in short.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

/// LCS length of interned sequences with the bit-vector recurrence
/// `V' = (V + (V & M)) | (V & !M)` over 64-bit words, where `M` marks the
/// positions of the current symbol in the shorter sequence.
pub(crate) fn lcs_len_ids(a: &[u32], b: &[u32]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return 0;
    }
    let words = short.len().div_ceil(64);
    let symbols = short.iter().chain(long).copied().max().unwrap_or(0) as usize + 1;
    let mut masks = vec![0u64; symbols * words];
    for (i, &s) in short.iter().enumerate() {
        masks[s as usize * words + i / 64] |= 1 << (i % 64);
    }
    let mut v = vec![u64::MAX; words];
    for &s in long {
        let m = &masks[s as usize * words..(s as usize + 1) * words];
        let mut carry = 0u64;
        for (vk, &mk) in v.iter_mut().zip(m) {
            let u = *vk & mk;
            let (sum, c1) = vk.overflowing_add(u);
            let (sum, c2) = sum.overflowing_add(carry);
            carry = (c1 || c2) as u64;
            *vk = sum | (*vk & !mk);
        }
    }
    let mut zeros = 0;
    for (k, vk) in v.iter().enumerate() {
        let bits = (short.len() - 64 * k).min(64);
        let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        zeros += (!vk & mask).count_ones() as usize;
    }
    zeros
}

/// ROUGE-L F1 from the word-level LCS.
pub fn rouge_l(candidate: &str, reference: &str) -> f64 {
    rouge_l_tokens(&metric_words(candidate), &metric_words(reference))
}

pub fn rouge_l_tokens(candidate: &[String], reference: &[String]) -> f64 {
    let t = intern(candidate, reference);
    rouge_l_ids(&t.cand, &t.refs)
}

pub(crate) fn rouge_l_ids(candidate: &[u32], reference: &[u32]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let lcs = lcs_len_ids(candidate, reference) as f64;
    f1(lcs / candidate.len() as f64, lcs / reference.len() as f64)
}

/// One matching stage: each unmatched candidate word takes the first free
/// reference word with the same form.
fn align_stage(
    cand_forms: &[String],
    ref_forms: &[String],
    cand_used: &mut [bool],
    ref_used: &mut [bool],
    pairs: &mut Vec<(usize, usize)>,
) {
    let mut positions: HashMap<&str, Vec<usize>> = HashMap::new();
    for (j, form) in ref_forms.iter().enumerate() {
        if !ref_used[j] {
            positions.entry(form.as_str()).or_default().push(j);
        }
    }
    let mut cursor: HashMap<&str, usize> = HashMap::new();
    for (i, form) in cand_forms.iter().enumerate() {
        if cand_used[i] {
            continue;
        }
        let Some(slots) = positions.get(form.as_str()) else {
            continue;
        };
        let next = cursor.entry(form.as_str()).or_insert(0);
        if let Some(&j) = slots.get(*next) {
            *next += 1;
            cand_used[i] = true;
            ref_used[j] = true;
            pairs.push((i, j));
        }
    }
}

/// A word alignment produced by the METEOR matcher: pairs of
/// (candidate index, reference index), sorted by candidate index.
pub fn meteor_alignment(candidate: &[String], reference: &[String]) -> Vec<(usize, usize)> {
    let mut cand_used = vec![false; candidate.len()];
    let mut ref_used = vec![false; reference.len()];
    let mut pairs = Vec::new();

    // Exact stage, then the stemmed stage on whatever is still unmatched.
    align_stage(candidate, reference, &mut cand_used, &mut ref_used, &mut pairs);
    let stems = |words: &[String], used: &[bool]| -> Vec<String> {
        words
            .iter()
            .zip(used)
            .map(|(w, &u)| if u { String::new() } else { porter::stem(w) })
            .collect()
    };
    let (cand_stems, ref_stems) = (stems(candidate, &cand_used), stems(reference, &ref_used));
    align_stage(&cand_stems, &ref_stems, &mut cand_used, &mut ref_used, &mut pairs);

    pairs.sort_unstable();
    pairs
}

/// Number of chunks in an alignment sorted by candidate index: maximal runs
/// that are contiguous in both the candidate and the reference.
pub fn chunk_count(alignment: &[(usize, usize)]) -> usize {
    if alignment.is_empty() {
        return 0;
    }
    1 + alignment
        .windows(2)
        .filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1))
        .count()
}

/// METEOR with exact and Porter-stem matching stages (no synonym stage).
///
/// `Fmean = 10PR / (R + 9P)`, penalty `0.5 * (chunks / matches)^3`.
pub fn meteor(candidate: &str, reference: &str) -> f64 {
    meteor_tokens(&metric_words(candidate), &metric_words(reference))
}

pub fn meteor_tokens(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let alignment = meteor_alignment(candidate, reference);
    let m = alignment.len();
    if m == 0 {
        return 0.0;
    }
    let p = m as f64 / candidate.len() as f64;
    let r = m as f64 / reference.len() as f64;
    let fmean = 10.0 * p * r / (r + 9.0 * p);
    let frag = chunk_count(&alignment) as f64 / m as f64;
    let penalty = 0.5 * frag.powi(3);
    fmean * (1.0 - penalty)
}

/// The five native relevance metrics for one candidate/reference pair,
/// tokenizing each text once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelevanceScores {
    pub bleu4: f64,
    pub rouge_1: f64,
    pub rouge_2: f64,
    pub rouge_l: f64,
    pub meteor: f64,
}

pub fn relevance_scores(candidate: &str, reference: &str) -> RelevanceScores {
    let c = metric_words(candidate);
    let r = metric_words(reference);
    let t = intern(&c, &r);
    RelevanceScores {
        bleu4: bleu4_ids(&t.cand, &t.refs),
        rouge_1: rouge_n_ids(&t.cand, &t.refs, 1),
        rouge_2: rouge_n_ids(&t.cand, &t.refs, 2),
        rouge_l: rouge_l_ids(&t.cand, &t.refs),
        meteor: meteor_tokens(&c, &r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn bit_parallel_lcs_matches_table() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..400 {
            let alphabet = rng.random_range(1..12u32);
            let mut seq = |max: usize| -> Vec<u32> {
                let n = rng.random_range(0..=max);
                (0..n).map(|_| rng.random_range(0..alphabet)).collect()
            };
            let (a, b) = (seq(200), seq(140));
            assert_eq!(lcs_len_ids(&a, &b), lcs_len(&a, &b), "{a:?} {b:?}");
        }
        for n in [63, 64, 65, 128, 129] {
            let a: Vec<u32> = (0..n).map(|i| i % 3).collect();
            assert_eq!(lcs_len_ids(&a, &a), n as usize);
        }
    }

    #[test]
    fn bleu_identity_and_empty() {
        assert!((bleu4("the cat sat on the mat", "the cat sat on the mat") - 1.0).abs() < 1e-12);
        assert_eq!(bleu4("", "the cat"), 0.0);
        assert_eq!(bleu4("dog", "the cat"), 0.0);
        // Shorter than four tokens: smoothed higher orders are 1/1.
        assert!((bleu4("a b", "a b") - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bleu_reference_pair() {
        // Unigrams 5/6, bigrams 3/5, trigrams 2/4, 4-grams 1/3, no brevity penalty.
        let expected = ((5.0f64 / 6.0).ln() + (0.6f64).ln() + (0.5f64).ln() + (1.0f64 / 3.0).ln()) / 4.0;
        let v = bleu4("the cat sat on the mat", "the cat sat on a mat");
        assert!((v - expected.exp()).abs() < 1e-12, "{v}");
    }

    #[test]
    fn bleu_brevity_penalty() {
        let v = bleu4("the cat sat on", "the cat sat on the mat");
        assert!((v - (1.0f64 - 6.0 / 4.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn rouge_examples() {
        let v = rouge_n("the cat sat", "the cat sat on the mat", 1);
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(rouge_n("a b c", "a b c", 2), 1.0);
        assert_eq!(rouge_n("a b c", "d e f", 1), 0.0);
        assert_eq!(rouge_n("a", "a", 2), 0.0);
    }

    #[test]
    fn rouge_l_example() {
        assert_eq!(lcs_len(&toks("a b c d"), &toks("a c b d")), 3);
        assert!((rouge_l("a b c d", "a c b d") - 0.75).abs() < 1e-12);
        assert_eq!(rouge_l("x y", "a b"), 0.0);
        assert_eq!(rouge_l("a b c", "a b c"), 1.0);
    }

    #[test]
    fn meteor_identity_penalty() {
        for m in 1..8usize {
            let text: Vec<String> = (0..m).map(|i| format!("w{i}")).collect();
            let v = meteor_tokens(&text, &text);
            assert!((v - (1.0 - 0.5 / (m as f64).powi(3))).abs() < 1e-12);
        }
    }

    #[test]
    fn meteor_stem_stage_matches_inflections() {
        let c = toks("cats sleep");
        let r = toks("cat sleeps");
        assert_eq!(meteor_alignment(&c, &r), vec![(0, 0), (1, 1)]);
        // P = R = 1, one chunk of two matches.
        assert!((meteor("cats sleep", "cat sleeps") - (1.0 - 0.5 / 8.0)).abs() < 1e-12);
        assert_eq!(meteor("alpha beta", "gamma delta"), 0.0);
    }

    #[test]
    fn meteor_exact_stage_takes_priority() {
        // "runs" must pair with the exact "runs", not the stem-equal "run".
        let c = toks("runs");
        let r = toks("run runs");
        assert_eq!(meteor_alignment(&c, &r), vec![(0, 1)]);
    }

    #[test]
    fn chunk_counting() {
        assert_eq!(chunk_count(&[]), 0);
        assert_eq!(chunk_count(&[(0, 0), (1, 1), (2, 2)]), 1);
        assert_eq!(chunk_count(&[(0, 1), (1, 0)]), 2);
        assert_eq!(chunk_count(&[(0, 0), (2, 1)]), 2);
    }

    #[test]
    fn combined_scores_match_individual_metrics() {
        let c = "patient was discharged home in stable condition";
        let r = "the patient was discharged in good condition";
        let s = relevance_scores(c, r);
        assert_eq!(s.bleu4, bleu4(c, r));
        assert_eq!(s.rouge_1, rouge_n(c, r, 1));
        assert_eq!(s.rouge_2, rouge_n(c, r, 2));
        assert_eq!(s.rouge_l, rouge_l(c, r));
        assert_eq!(s.meteor, meteor(c, r));
    }
}
