//! Word tokenization and overlapping phrase enumeration.
//!
//! The phrase windows produced here feed the soft n-grams metric: every
//! contiguous run of `a..=b` words, overlapping, in reading order.

use crate::error::{Error, Result};

/// A contiguous window of words taken from a tokenized text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phrase {
    /// The words of the window, in order.
    pub words: Vec<String>,
    /// Offset of the first word within the source word sequence.
    pub start_index: usize,
    /// Space-joined surface form, the string handed to the embedder.
    pub text: String,
}

impl Phrase {
    fn from_slice(words: &[String], start_index: usize) -> Self {
        Phrase {
            words: words.to_vec(),
            start_index,
            text: words.join(" "),
        }
    }
}

/// Splits on Unicode whitespace, lowercases, strips leading and trailing
/// punctuation from each token, and drops tokens that become empty.
/// Interior punctuation ("don't", "stop—now") is preserved.
pub fn tokenize_words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|raw| {
            raw.to_lowercase()
                .trim_matches(|c: char| !c.is_alphanumeric())
                .to_string()
        })
        .filter(|tok| !tok.is_empty())
        .collect()
}

/// Enumerates every contiguous window of `n` words for each `n` in
/// `a..=min(b, len)`, overlapping, shorter windows first, in reading order.
///
/// A non-empty sequence shorter than `a` words yields the whole sequence as
/// a single phrase so the metric stays defined on very short texts. An empty
/// sequence yields no phrases.
pub fn enumerate_phrases(words: &[String], a: usize, b: usize) -> Result<Vec<Phrase>> {
    if a == 0 {
        return Err(Error::invalid("minimum phrase length must be >= 1"));
    }
    if a > b {
        return Err(Error::invalid(format!(
            "minimum phrase length {a} exceeds maximum {b}"
        )));
    }
    let len = words.len();
    if len == 0 {
        return Ok(Vec::new());
    }
    if len < a {
        return Ok(vec![Phrase::from_slice(words, 0)]);
    }
    let max_n = b.min(len);
    let mut phrases = Vec::with_capacity(expected_phrase_count(len, a, b));
    for n in a..=max_n {
        for start in 0..=(len - n) {
            phrases.push(Phrase::from_slice(&words[start..start + n], start));
        }
    }
    Ok(phrases)
}

/// Closed-form count matching [`enumerate_phrases`] for `len >= a`.
pub fn expected_phrase_count(len: usize, a: usize, b: usize) -> usize {
    if len == 0 {
        return 0;
    }
    if len < a {
        return 1;
    }
    (a..=b.min(len)).map(|n| len - n + 1).sum()
}
