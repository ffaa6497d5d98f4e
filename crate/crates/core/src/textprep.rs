//! Tokenization shared by every natively computed metric.
//!
//! Two word notions coexist:
//!
//! * *metric words*: maximal runs of alphanumerics and apostrophes, lowercased.
//!   Readability formulas and the n-gram metrics use these.
//! * *whitespace words*: the tokens of a plain whitespace split. Length-based
//!   selection and word-budget truncation use these ([`word_count`]).
//!
//! Syllables come from a rule-based vowel-group heuristic, so absolute
//! grade-level values are tied to that heuristic.

use std::collections::HashSet;
use std::sync::OnceLock;

const DEFAULT_ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenizedText {
    pub sentences: Vec<Vec<String>>,
    pub n_sentences: usize,
    pub n_words: usize,
    pub n_syllables: usize,
    pub n_letters: usize,
}

impl TokenizedText {
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().flatten().map(String::as_str)
    }
}

/// Sentence/word tokenizer with an abbreviation guard list.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    abbreviations: HashSet<String>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Self::from_list(DEFAULT_ABBREVIATIONS)
    }
}

impl Tokenizer {
    /// Builds a tokenizer from a newline-separated abbreviation list.
    pub fn from_list(list: &str) -> Self {
        let abbreviations = list
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Tokenizer { abbreviations }
    }

    /// Adds entries on top of the current list.
    pub fn extend_from_list(&mut self, list: &str) {
        self.abbreviations.extend(Self::from_list(list).abbreviations);
    }

    pub fn is_abbreviation(&self, chunk: &str) -> bool {
        self.abbreviations.contains(&chunk.to_lowercase())
    }

    pub fn tokenize(&self, text: &str) -> TokenizedText {
        let mut sentences = Vec::new();
        let mut current: Vec<String> = Vec::new();

        for chunk in text.split_whitespace() {
            current.extend(metric_words(chunk));
            let stripped = chunk.trim_end_matches(['"', '\'', ')', ']']);
            let terminal = stripped.ends_with(['.', '!', '?']);
            if terminal && !self.is_abbreviation(stripped) && !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            sentences.push(current);
        }

        let n_words = sentences.iter().map(Vec::len).sum();
        let n_syllables = sentences.iter().flatten().map(|w| count_syllables(w)).sum();
        let n_letters = text.chars().filter(|c| c.is_alphabetic()).count();
        TokenizedText {
            n_sentences: sentences.len(),
            sentences,
            n_words,
            n_syllables,
            n_letters,
        }
    }
}

fn default_tokenizer() -> &'static Tokenizer {
    static TOKENIZER: OnceLock<Tokenizer> = OnceLock::new();
    TOKENIZER.get_or_init(Tokenizer::default)
}

/// Tokenizes with the shipped abbreviation list.
pub fn tokenize(text: &str) -> TokenizedText {
    default_tokenizer().tokenize(text)
}

/// Metric words of `text` in order, without sentence structure.
pub fn metric_words(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|w| w.trim_matches('\''))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Whitespace-token count.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel-group syllable estimate for a lowercase word; never less than 1.
///
/// A final `e` that forms its own vowel group is treated as silent, except
/// in a consonant + `le` ending ("table").
pub fn count_syllables(word: &str) -> usize {
    let chars: Vec<char> = word.chars().collect();
    let mut groups = 0usize;
    let mut prev_vowel = false;
    for &c in &chars {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }

    let n = chars.len();
    if groups > 1 && n >= 2 && chars[n - 1] == 'e' && !is_vowel(chars[n - 2]) {
        let consonant_le = n >= 3 && chars[n - 2] == 'l' && chars[n - 3].is_alphabetic() && !is_vowel(chars[n - 3]);
        if !consonant_le {
            groups -= 1;
        }
    }
    groups.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_sentence_counts() {
        let t = tokenize("The cat sat on the mat.");
        assert_eq!(t.n_sentences, 1);
        assert_eq!(t.n_words, 6);
        assert_eq!(t.n_letters, 17);
        assert_eq!(t.n_syllables, 6);
        assert_eq!(t.sentences[0][0], "the");
    }

    #[test]
    fn empty_text_is_all_zero() {
        assert_eq!(tokenize(""), TokenizedText::default());
        assert_eq!(tokenize("  \n\t ").n_words, 0);
    }

    #[test]
    fn abbreviation_guard_suppresses_split() {
        let t = tokenize("Dr. Smith left. He returned.");
        assert_eq!(t.n_sentences, 2);
        assert_eq!(t.sentences[0], vec!["dr", "smith", "left"]);
    }

    #[test]
    fn custom_abbreviations_extend_the_list() {
        let mut tok = Tokenizer::default();
        assert_eq!(tok.tokenize("Pt. stable. Home.").n_sentences, 3);
        tok.extend_from_list("pt.\n");
        assert_eq!(tok.tokenize("Pt. stable. Home.").n_sentences, 2);
    }

    #[test]
    fn terminators_inside_quotes_and_without_space() {
        assert_eq!(tokenize("He said \"stop!\" Then left").n_sentences, 2);
        assert_eq!(tokenize("version 1.5 released").n_sentences, 1);
        assert_eq!(tokenize("... !!").n_sentences, 0);
    }

    #[test]
    fn metric_words_keep_apostrophes_and_digits() {
        assert_eq!(
            metric_words("Don't take 20mg, 'now'."),
            vec!["don't", "take", "20mg", "now"]
        );
    }

    #[test]
    fn syllable_rules() {
        assert_eq!(count_syllables("cat"), 1);
        assert_eq!(count_syllables("generate"), 3);
        assert_eq!(count_syllables("table"), 2);
        assert_eq!(count_syllables("the"), 1);
        assert_eq!(count_syllables("whale"), 1);
        assert_eq!(count_syllables("agree"), 2);
        assert_eq!(count_syllables("rhythm"), 1);
        assert_eq!(count_syllables("123"), 1);
    }

    #[test]
    fn whitespace_word_count() {
        assert_eq!(word_count("a b  c"), 3);
        assert_eq!(word_count(""), 0);
        let long: String = (0..2500).map(|i| format!("w{i} ")).collect();
        assert_eq!(word_count(&long), 2500);
    }
}
