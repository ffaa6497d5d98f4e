use dexsel_core::analysis::pearson;
use dexsel_core::corpus::HeaderSet;
use dexsel_core::readability::{readability, FamiliarWords};
use dexsel_core::relevance;
use dexsel_core::reorder::{rank_sections, split_sections, truncate_text, ExternalSectionScores};
use dexsel_core::textprep::{count_syllables, tokenize, word_count};
use proptest::prelude::*;

fn sentence() -> impl Strategy<Value = String> {
    // The last word ends in "zq" so it is never a known abbreviation.
    (prop::collection::vec("[a-z]{1,9}", 0..11), "[a-z]{1,6}").prop_map(|(w, last)| {
        let mut s = w.join(" ");
        if !s.is_empty() {
            s.push(' ');
        }
        s.push_str(&last);
        s.push_str("zq.");
        s
    })
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(sentence(), 1..6).prop_map(|s| s.join(" "))
}

proptest! {
    #[test]
    fn tokenize_is_additive(a in text(), b in text()) {
        let (ta, tb) = (tokenize(&a), tokenize(&b));
        let joined = tokenize(&format!("{a} {b}"));
        prop_assert_eq!(joined.n_words, ta.n_words + tb.n_words);
        prop_assert_eq!(joined.n_sentences, ta.n_sentences + tb.n_sentences);
        prop_assert_eq!(joined.n_syllables, ta.n_syllables + tb.n_syllables);
        prop_assert_eq!(joined.n_letters, ta.n_letters + tb.n_letters);
    }

    #[test]
    fn every_word_has_a_syllable(w in "[a-z]{1,15}") {
        prop_assert!(count_syllables(&w) >= 1);
    }

    #[test]
    fn readability_is_duplication_invariant(t in text()) {
        let once = readability(&tokenize(&t), FamiliarWords::dale_chall()).unwrap();
        let twice = readability(&tokenize(&format!("{t} {t}")), FamiliarWords::dale_chall()).unwrap();
        prop_assert!((once.fkgl - twice.fkgl).abs() < 1e-9);
        prop_assert!((once.dcrs - twice.dcrs).abs() < 1e-9);
        prop_assert!((once.cli - twice.cli).abs() < 1e-9);
    }

    #[test]
    fn rouge_1_ignores_candidate_order(
        words in prop::collection::vec("[a-e]{1,2}", 1..15),
        reference in prop::collection::vec("[a-e]{1,2}", 1..15),
        seed in any::<u64>(),
    ) {
        let mut shuffled = words.clone();
        let n = shuffled.len();
        for i in 0..n {
            shuffled.swap(i, (seed as usize).wrapping_add(i * 7) % n);
        }
        prop_assert_eq!(
            relevance::rouge_n_tokens(&words, &reference, 1),
            relevance::rouge_n_tokens(&shuffled, &reference, 1)
        );
    }

    #[test]
    fn metrics_are_bounded(
        c in prop::collection::vec("[a-d]{1,3}", 0..20),
        r in prop::collection::vec("[a-d]{1,3}", 0..20),
    ) {
        for v in [
            relevance::bleu4_tokens(&c, &r),
            relevance::rouge_n_tokens(&c, &r, 1),
            relevance::rouge_n_tokens(&c, &r, 2),
            relevance::rouge_l_tokens(&c, &r),
            relevance::meteor_tokens(&c, &r),
        ] {
            prop_assert!((0.0..=1.0).contains(&v), "{v}");
        }
        if !c.is_empty() {
            prop_assert_eq!(relevance::rouge_n_tokens(&c, &c, 1), 1.0);
        }
    }

    #[test]
    fn truncation_word_count_law(s in "[a-c \n\t]{0,200}", budget in 1usize..40) {
        let out = truncate_text(&s, budget);
        prop_assert_eq!(word_count(out), budget.min(word_count(&s)));
        prop_assert!(s.starts_with(out));
    }

    #[test]
    fn ranking_is_a_permutation(scores in prop::collection::vec(-1.0f64..1.0, 4)) {
        let text = "Intro.\nAllergies:\na\nSocial History:\nb c\nLabs:\nd\n";
        let doc = split_sections("d", text, HeaderSet::shared());
        prop_assert_eq!(doc.sections.len(), 4);
        let mut ext = ExternalSectionScores::default();
        for (i, s) in scores.iter().enumerate() {
            ext.insert("d", i, *s);
        }
        let ranked = rank_sections(doc.clone(), "", &ext).unwrap();
        let mut before: Vec<(String, String)> = doc.sections.iter().map(|s| (s.header.clone(), s.body.clone())).collect();
        let mut after: Vec<(String, String)> = ranked.sections.iter().map(|s| (s.header.clone(), s.body.clone())).collect();
        before.sort();
        after.sort();
        prop_assert_eq!(before, after);
        for w in ranked.sections.windows(2) {
            prop_assert!(w[0].relevance >= w[1].relevance);
        }
    }

    #[test]
    fn pearson_of_affine_image(
        x in prop::collection::vec(-100.0f64..100.0, 3..40),
        a in prop_oneof![0.01f64..50.0, -50.0f64..-0.01],
        b in -100.0f64..100.0,
    ) {
        let spread = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - x.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assume!(spread > 1e-3);
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let r = pearson(&x, &y).unwrap();
        prop_assert!((r - a.signum()).abs() < 1e-9, "{r}");
    }
}
