//! Metric implementations against the brute-force reference crate.

use dexsel_core::relevance::{self, porter};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VOCAB: &[&str] = &[
    "the",
    "patient",
    "patients",
    "was",
    "admitted",
    "admit",
    "fever",
    "feverish",
    "treated",
    "treatment",
    "home",
    "stable",
    "walk",
    "walking",
    "walked",
    "a",
    "of",
    "pain",
];

fn tokens(rng: &mut impl Rng, max: usize) -> Vec<String> {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| VOCAB.choose(rng).unwrap().to_string()).collect()
}

#[test]
fn rouge_matches_exhaustive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let c = tokens(&mut rng, 12);
        let r = tokens(&mut rng, 12);
        for n in 1..=2 {
            let got = relevance::rouge_n_tokens(&c, &r, n);
            let want = dexsel_oracles::rouge_n(&c, &r, n);
            assert!((got - want).abs() < 1e-9, "rouge-{n} {c:?} {r:?}: {got} vs {want}");
        }
        let got = relevance::rouge_l_tokens(&c, &r);
        let want = dexsel_oracles::rouge_l(&c, &r);
        assert!((got - want).abs() < 1e-9, "rouge-l {c:?} {r:?}: {got} vs {want}");
        assert_eq!(relevance::lcs_len(&c, &r), dexsel_oracles::lcs_exhaustive(&c, &r));
    }
}

#[test]
fn bleu_and_meteor_match_formula_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let c = tokens(&mut rng, 30);
        let r = tokens(&mut rng, 30);
        let got = relevance::bleu4_tokens(&c, &r);
        let want = dexsel_oracles::bleu4(&c, &r);
        assert!((got - want).abs() < 1e-9, "bleu {c:?} {r:?}: {got} vs {want}");
        let got = relevance::meteor_tokens(&c, &r);
        let want = dexsel_oracles::meteor(&c, &r, porter::stem);
        assert!((got - want).abs() < 1e-9, "meteor {c:?} {r:?}: {got} vs {want}");
    }
}

#[test]
fn clipped_counts_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let c = tokens(&mut rng, 15);
        let r = tokens(&mut rng, 15);
        for n in 1..=4 {
            assert_eq!(
                relevance::clipped_matches(&c, &r, n),
                dexsel_oracles::clipped_matches(&c, &r, n)
            );
        }
    }
}
