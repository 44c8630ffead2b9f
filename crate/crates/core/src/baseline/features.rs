//! Hashed n-gram features for the desk-scale scorer.

use serde::{Deserialize, Serialize};

use crate::embedding::hash64;
use crate::error::{Error, Result};
use crate::segmentation::tokenize_words;
use crate::Scalar;

/// An n-gram family contributing features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureFamily {
    WordUnigram,
    WordBigram,
    Char3gram,
    Char4gram,
    Char5gram,
}

impl FeatureFamily {
    pub const ALL: [FeatureFamily; 5] = [
        FeatureFamily::WordUnigram,
        FeatureFamily::WordBigram,
        FeatureFamily::Char3gram,
        FeatureFamily::Char4gram,
        FeatureFamily::Char5gram,
    ];

    pub(crate) fn code(&self) -> u8 {
        match self {
            FeatureFamily::WordUnigram => 0,
            FeatureFamily::WordBigram => 1,
            FeatureFamily::Char3gram => 2,
            FeatureFamily::Char4gram => 3,
            FeatureFamily::Char5gram => 4,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        FeatureFamily::ALL.into_iter().find(|f| f.code() == code)
    }

    fn char_n(&self) -> Option<usize> {
        match self {
            FeatureFamily::Char3gram => Some(3),
            FeatureFamily::Char4gram => Some(4),
            FeatureFamily::Char5gram => Some(5),
            _ => None,
        }
    }
}

/// Hashing-trick feature space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSpec {
    /// Number of hash bins; a power of two, at least 2^10.
    pub dim: usize,
    pub families: Vec<FeatureFamily>,
    #[serde(default)]
    pub hash_seed: u64,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        FeatureSpec {
            dim: 1 << 18,
            families: FeatureFamily::ALL.to_vec(),
            hash_seed: 0,
        }
    }
}

impl FeatureSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.dim.is_power_of_two() || self.dim < (1 << 10) {
            return Err(Error::invalid(format!(
                "feature dim must be a power of two >= 1024, got {}",
                self.dim
            )));
        }
        if self.families.is_empty() {
            return Err(Error::invalid("at least one feature family must be enabled"));
        }
        Ok(())
    }
}

/// L2-normalized sparse count vector, indices strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    pub indices: Vec<u32>,
    pub values: Vec<Scalar>,
}

impl SparseVector {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn l2_norm(&self) -> Scalar {
        self.values.iter().map(|v| v * v).sum::<Scalar>().sqrt()
    }
}

/// Counts each enabled n-gram family into `dim` hash bins, then
/// L2-normalizes. Deterministic in `(text, spec)`.
pub fn featurize(text: &str, spec: &FeatureSpec) -> Result<SparseVector> {
    if text.trim().is_empty() {
        return Err(Error::invalid("cannot featurize empty text"));
    }
    let mask = (spec.dim - 1) as u64;
    let seed = spec.hash_seed.to_le_bytes();
    let mut counts: std::collections::HashMap<u32, Scalar> = std::collections::HashMap::new();
    let mut bump = |family: FeatureFamily, payload: &[u8]| {
        let bin = (hash64(&[&seed, &[family.code()], payload]) & mask) as u32;
        *counts.entry(bin).or_insert(0.0) += 1.0;
    };

    let words = tokenize_words(text);
    let mut normalized: Option<Vec<char>> = None;
    for &family in &spec.families {
        match family {
            FeatureFamily::WordUnigram => {
                for word in &words {
                    bump(family, word.as_bytes());
                }
            }
            FeatureFamily::WordBigram => {
                for pair in words.windows(2) {
                    let joined = format!("{}\u{1f}{}", pair[0], pair[1]);
                    bump(family, joined.as_bytes());
                }
            }
            _ => {
                let n = family.char_n().expect("char family");
                let chars = normalized.get_or_insert_with(|| normalized_chars(text));
                if chars.len() >= n {
                    for window in chars.windows(n) {
                        let gram: String = window.iter().collect();
                        bump(family, gram.as_bytes());
                    }
                }
            }
        }
    }
    if counts.is_empty() {
        return Err(Error::invalid("text yields no features under this spec"));
    }
    let mut entries: Vec<(u32, Scalar)> = counts.into_iter().collect();
    entries.sort_unstable_by_key(|&(i, _)| i);
    let norm = entries.iter().map(|&(_, v)| v * v).sum::<Scalar>().sqrt();
    let (indices, values) = entries
        .into_iter()
        .map(|(i, v)| (i, v / norm))
        .unzip();
    Ok(SparseVector { indices, values })
}

/// Lowercased characters with whitespace runs collapsed to single spaces.
fn normalized_chars(text: &str) -> Vec<char> {
    let mut out = Vec::with_capacity(text.len());
    let mut last_was_space = true;
    for c in text.to_lowercase().chars() {
        if c.is_whitespace() {
            if !last_was_space {
                out.push(' ');
                last_was_space = true;
            }
        } else {
            out.push(c);
            last_was_space = false;
        }
    }
    while out.last() == Some(&' ') {
        out.pop();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn small_spec() -> FeatureSpec {
        FeatureSpec {
            dim: 1 << 10,
            ..FeatureSpec::default()
        }
    }

    #[test]
    fn featurize_is_deterministic_and_unit_norm() {
        let spec = small_spec();
        let a = featurize("The quick brown fox jumps over the lazy dog.", &spec).unwrap();
        let b = featurize("The quick brown fox jumps over the lazy dog.", &spec).unwrap();
        assert_eq!(a, b);
        assert!((a.l2_norm() - 1.0).abs() < 1e-9);
        assert!(a.indices.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn empty_text_is_invalid() {
        assert!(featurize("", &small_spec()).is_err());
        assert!(featurize("   ", &small_spec()).is_err());
    }

    #[test]
    fn single_word_changes_move_some_bin() {
        let spec = small_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut differing = 0;
        let total = 1000;
        for _ in 0..total {
            let base: Vec<String> = (0..30).map(|_| format!("tok{}", rng.gen_range(0..2000u32))).collect();
            let mut changed = base.clone();
            let at = rng.gen_range(0..changed.len());
            changed[at] = format!("swap{}", rng.gen_range(0..2000u32));
            let fa = featurize(&base.join(" "), &spec).unwrap();
            let fb = featurize(&changed.join(" "), &spec).unwrap();
            if fa != fb {
                differing += 1;
            }
        }
        assert!(differing >= 999, "only {differing}/{total} differ");
    }

    #[test]
    fn families_restrict_features() {
        let spec = FeatureSpec {
            dim: 1 << 10,
            families: vec![FeatureFamily::WordUnigram],
            hash_seed: 0,
        };
        let single = featurize("alpha beta alpha", &spec).unwrap();
        assert!(single.nnz() <= 2);
        // counts reflect multiplicity: alpha twice, beta once
        let max = single.values.iter().cloned().fold(0.0, Scalar::max);
        let min = single.values.iter().cloned().fold(2.0, Scalar::min);
        assert!((max / min - 2.0).abs() < 1e-9);
    }

    #[test]
    fn char_ngrams_cover_short_unpunctuated_text() {
        let spec = FeatureSpec {
            dim: 1 << 10,
            families: vec![FeatureFamily::Char3gram],
            hash_seed: 0,
        };
        assert!(featurize("abc", &spec).unwrap().nnz() >= 1);
        // two chars cannot form a 3-gram
        assert!(featurize("ab", &spec).is_err());
    }

    #[test]
    fn hash_seed_changes_layout() {
        let a = featurize("some words here", &small_spec()).unwrap();
        let spec_b = FeatureSpec {
            hash_seed: 99,
            ..small_spec()
        };
        let b = featurize("some words here", &spec_b).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn spec_validation() {
        assert!(FeatureSpec::default().validate().is_ok());
        assert!(FeatureSpec { dim: 1000, ..FeatureSpec::default() }.validate().is_err());
        assert!(FeatureSpec { dim: 1 << 9, ..FeatureSpec::default() }.validate().is_err());
        assert!(FeatureSpec { families: vec![], ..FeatureSpec::default() }.validate().is_err());
    }
}
