//! Reference-free readability scores: Flesch-Kincaid grade level,
//! Dale-Chall readability score, and Coleman-Liau index.

use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::TokenizedText;

const DALE_CHALL_LIST: &str = include_str!("../data/dale_chall.txt");

/// Percentage of difficult words above which the Dale-Chall adjustment applies.
/// The comparison is strict: exactly 5% gets no adjustment.
pub const DALE_CHALL_THRESHOLD: f64 = 5.0;
const DALE_CHALL_ADJUSTMENT: f64 = 3.6365;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityScores {
    pub fkgl: f64,
    pub dcrs: f64,
    pub cli: f64,
}

/// Words a typical fourth grader is expected to know.
#[derive(Debug, Clone)]
pub struct FamiliarWords {
    words: HashSet<String>,
}

impl FamiliarWords {
    pub fn from_list(list: &str) -> Result<Self> {
        let words: HashSet<String> = list
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty())
            .collect();
        if words.is_empty() {
            return Err(Error::Config("familiar-word list is empty".into()));
        }
        Ok(FamiliarWords { words })
    }

    /// The shipped Dale-Chall list.
    pub fn dale_chall() -> &'static FamiliarWords {
        static LIST: OnceLock<FamiliarWords> = OnceLock::new();
        LIST.get_or_init(|| FamiliarWords::from_list(DALE_CHALL_LIST).expect("shipped list"))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Membership after stripping one simple inflection (s, es, ed, ing).
    /// Purely numeric tokens count as familiar.
    pub fn is_familiar(&self, word: &str) -> bool {
        if word.chars().all(|c| c.is_ascii_digit()) {
            return true;
        }
        if self.words.contains(word) {
            return true;
        }
        ["s", "es", "ed", "ing"].iter().any(|suffix| {
            word.strip_suffix(suffix)
                .is_some_and(|stem| !stem.is_empty() && self.words.contains(stem))
        })
    }
}

fn require_words_and_sentences(t: &TokenizedText) -> Result<()> {
    if t.n_words == 0 {
        return Err(Error::UndefinedInput("text has no words"));
    }
    if t.n_sentences == 0 {
        return Err(Error::UndefinedInput("text has no sentences"));
    }
    Ok(())
}

pub fn fkgl(t: &TokenizedText) -> Result<f64> {
    require_words_and_sentences(t)?;
    let words_per_sentence = t.n_words as f64 / t.n_sentences as f64;
    let syllables_per_word = t.n_syllables as f64 / t.n_words as f64;
    Ok(0.39 * words_per_sentence + 11.8 * syllables_per_word - 15.59)
}

/// Percentage (0-100) of words not on the familiar list.
pub fn percent_difficult(t: &TokenizedText, familiar: &FamiliarWords) -> f64 {
    if t.n_words == 0 {
        return 0.0;
    }
    let difficult = t.words().filter(|w| !familiar.is_familiar(w)).count();
    100.0 * difficult as f64 / t.n_words as f64
}

pub fn dcrs(t: &TokenizedText, familiar: &FamiliarWords) -> Result<f64> {
    require_words_and_sentences(t)?;
    if familiar.is_empty() {
        return Err(Error::Config("familiar-word list is empty".into()));
    }
    let pct = percent_difficult(t, familiar);
    let raw = 0.1579 * pct + 0.0496 * (t.n_words as f64 / t.n_sentences as f64);
    Ok(if pct > DALE_CHALL_THRESHOLD {
        raw + DALE_CHALL_ADJUSTMENT
    } else {
        raw
    })
}

pub fn cli(t: &TokenizedText) -> Result<f64> {
    if t.n_words == 0 {
        return Err(Error::UndefinedInput("text has no words"));
    }
    let per_100 = 100.0 / t.n_words as f64;
    let letters = t.n_letters as f64 * per_100;
    let sentences = t.n_sentences as f64 * per_100;
    Ok(0.0588 * letters - 0.296 * sentences - 15.8)
}

pub fn readability(t: &TokenizedText, familiar: &FamiliarWords) -> Result<ReadabilityScores> {
    Ok(ReadabilityScores {
        fkgl: fkgl(t)?,
        dcrs: dcrs(t, familiar)?,
        cli: cli(t)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::tokenize;

    fn dc() -> &'static FamiliarWords {
        FamiliarWords::dale_chall()
    }

    #[test]
    fn fkgl_reference_sentence() {
        let v = fkgl(&tokenize("The cat sat on the mat.")).unwrap();
        assert!((v - -1.45).abs() < 1e-9, "{v}");
        let single = fkgl(&tokenize("cat.")).unwrap();
        assert!((single - -3.40).abs() < 1e-9, "{single}");
    }

    #[test]
    fn cli_reference_sentence() {
        let v = cli(&tokenize("The cat sat on the mat.")).unwrap();
        let expected = 0.0588 * (1700.0 / 6.0) - 0.296 * (100.0 / 6.0) - 15.8;
        assert!((v - expected).abs() < 1e-12);
        assert!((v - -4.07).abs() < 0.01, "{v}");
    }

    #[test]
    fn cli_hundred_letter_word() {
        let word: String = "a".repeat(100);
        let v = cli(&tokenize(&format!("{word}."))).unwrap();
        // L = 100 letters * 100 = 10000; S = 100.
        assert!((v - (0.0588 * 10000.0 - 0.296 * 100.0 - 15.8)).abs() < 1e-9);
        assert!((v - 542.6).abs() < 1e-9);
    }

    #[test]
    fn dcrs_all_familiar() {
        let v = dcrs(&tokenize("The cat sat on the mat."), dc()).unwrap();
        assert!((v - 0.2976).abs() < 1e-12, "{v}");
    }

    #[test]
    fn dcrs_all_difficult() {
        let text = "zyxq qwvx plmk trbz vvxq nnkp qzpt kkqz wxzt rrqp.";
        let t = tokenize(text);
        assert_eq!(percent_difficult(&t, dc()), 100.0);
        let v = dcrs(&t, dc()).unwrap();
        assert!((v - 19.9225).abs() < 1e-9, "{v}");
    }

    #[test]
    fn dcrs_threshold_is_exclusive() {
        // 19 familiar words + 1 difficult in one sentence: exactly 5%.
        let mut words = vec!["the"; 19];
        words.push("zyxq");
        let t = tokenize(&format!("{}.", words.join(" ")));
        assert_eq!(percent_difficult(&t, dc()), 5.0);
        let v = dcrs(&t, dc()).unwrap();
        assert!((v - (0.1579 * 5.0 + 0.0496 * 20.0)).abs() < 1e-12);
    }

    #[test]
    fn inflections_are_stripped() {
        let list = FamiliarWords::from_list("walk\nbox\n").unwrap();
        for w in ["walk", "walks", "walked", "walking", "boxes", "2024"] {
            assert!(list.is_familiar(w), "{w}");
        }
        assert!(!list.is_familiar("walker"));
    }

    #[test]
    fn empty_familiar_list_is_config_error() {
        assert!(matches!(FamiliarWords::from_list("\n\n"), Err(Error::Config(_))));
    }

    #[test]
    fn undefined_inputs() {
        let empty = tokenize("");
        assert!(fkgl(&empty).is_err());
        assert!(cli(&empty).is_err());
        assert!(dcrs(&empty, dc()).is_err());
    }

    #[test]
    fn duplication_invariance() {
        let text = "Patient was admitted with chest pain. Troponins were negative! Discharged home.";
        let a = readability(&tokenize(text), dc()).unwrap();
        let b = readability(&tokenize(&format!("{text} {text}")), dc()).unwrap();
        assert!((a.fkgl - b.fkgl).abs() < 1e-9);
        assert!((a.dcrs - b.dcrs).abs() < 1e-9);
        assert!((a.cli - b.cli).abs() < 1e-9);
    }
}
