//! Similarity metrics over source/edited pairs and the score algebra built
//! on them: edit magnitude, scaled targets, bucket assignment, midpoints,
//! and decoding.

use serde::{Deserialize, Serialize};

use crate::embedding::{cosine_similarity, Embedder, EmbedderConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::segmentation::{enumerate_phrases, tokenize_words};
use crate::Scalar;

/// Which supervision metric produced a raw score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    CosineDistance,
    SoftNgrams,
}

/// Parameters of the soft n-grams phrase-precision metric.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoftNgramParams {
    /// Minimum phrase length in words.
    pub a: usize,
    /// Maximum phrase length in words.
    pub b: usize,
    /// Phrase-match similarity threshold in (0, 1].
    pub tau: Scalar,
    pub phrase_embedder: EmbedderConfig,
}

impl Default for SoftNgramParams {
    fn default() -> Self {
        SoftNgramParams {
            a: 3,
            b: 5,
            tau: 0.85,
            phrase_embedder: EmbedderConfig {
                dim: 256,
                ..EmbedderConfig::default()
            },
        }
    }
}

impl SoftNgramParams {
    pub fn validate(&self) -> Result<()> {
        if self.a == 0 || self.a > self.b {
            return Err(Error::invalid(format!(
                "soft n-gram lengths must satisfy 1 <= a <= b, got a={} b={}",
                self.a, self.b
            )));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::invalid(format!(
                "soft n-gram tau must be in (0, 1], got {}",
                self.tau
            )));
        }
        self.phrase_embedder.validate()
    }
}

/// Low/high thresholds mapping a raw distance onto the `[0, 1]` target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleSpec<T: Real> {
    pub tau_low: T,
    pub tau_high: T,
}

impl<T: Real> ScaleSpec<T> {
    pub fn new(tau_low: T, tau_high: T) -> Result<Self> {
        let spec = ScaleSpec { tau_low, tau_high };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_low >= T::zero() && self.tau_low < self.tau_high) {
            return Err(Error::invalid(format!(
                "scale spec requires 0 <= tau_low < tau_high, got ({}, {})",
                self.tau_low, self.tau_high
            )));
        }
        Ok(())
    }
}

/// Discretization of the raw-score range into `n` equal-width buckets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BucketSpec<T: Real> {
    pub n: usize,
    pub tau_min: T,
    pub tau_max: T,
}

impl<T: Real> BucketSpec<T> {
    pub fn new(n: usize, tau_min: T, tau_max: T) -> Result<Self> {
        let spec = BucketSpec { n, tau_min, tau_max };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!("bucket count must be >= 2, got {}", self.n)));
        }
        if !(self.tau_min < self.tau_max) {
            return Err(Error::invalid(format!(
                "bucket spec requires tau_min < tau_max, got ({}, {})",
                self.tau_min, self.tau_max
            )));
        }
        Ok(())
    }

    /// The matching scale spec (the two threshold pairs play the same role).
    pub fn scale(&self) -> ScaleSpec<T> {
        ScaleSpec {
            tau_low: self.tau_min,
            tau_high: self.tau_max,
        }
    }
}

/// Cosine distance (1 - cosine similarity) between the document embeddings
/// of the two texts. 0 means identical-direction embeddings.
pub fn cosine_distance_score(
    source: &str,
    edited: &str,
    doc_embedder: &dyn Embedder,
) -> Result<Scalar> {
    if source.trim().is_empty() || edited.trim().is_empty() {
        return Err(Error::invalid("cosine distance requires non-empty texts"));
    }
    let vectors = doc_embedder.embed_batch(&[source, edited])?;
    Ok(1.0 - cosine_similarity(&vectors[0], &vectors[1])?)
}

/// Fraction of edited-text phrases whose best cosine similarity against any
/// source phrase is at least `tau`.
///
/// Phrases are every overlapping window of `a..=b` words. With `tau = 1`
/// this reduces to exact n-gram overlap precision: a phrase matches exactly
/// when its embedding coincides with a source phrase embedding, and under
/// the deterministic embedder that means the same (canonicalized) words.
pub fn soft_ngrams_precision(
    source: &str,
    edited: &str,
    a: usize,
    b: usize,
    tau: Scalar,
    phrase_embedder: &dyn Embedder,
) -> Result<Scalar> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::invalid(format!("tau must be in (0, 1], got {tau}")));
    }
    let edited_words = tokenize_words(edited);
    let edited_phrases = enumerate_phrases(&edited_words, a, b)?;
    if edited_phrases.is_empty() {
        return Err(Error::invalid("edited text yields no phrases"));
    }
    let source_words = tokenize_words(source);
    let source_phrases = enumerate_phrases(&source_words, a, b)?;
    if source_phrases.is_empty() {
        return Ok(0.0);
    }

    // Embed each distinct surface once; identical surfaces share a vector.
    let mut surfaces: Vec<&str> = Vec::new();
    let mut index_of = std::collections::HashMap::new();
    for phrase in source_phrases.iter().chain(edited_phrases.iter()) {
        index_of.entry(phrase.text.as_str()).or_insert_with(|| {
            surfaces.push(phrase.text.as_str());
            surfaces.len() - 1
        });
    }
    let vectors = phrase_embedder.embed_batch(&surfaces)?;

    let source_set: std::collections::HashSet<&str> =
        source_phrases.iter().map(|p| p.text.as_str()).collect();
    let source_indices: Vec<usize> = source_set.iter().map(|s| index_of[s]).collect();

    let mut matched = 0usize;
    for phrase in &edited_phrases {
        // Same surface means the same vector, whose true cosine is exactly 1.
        if source_set.contains(phrase.text.as_str()) {
            matched += 1;
            continue;
        }
        let ev = &vectors[index_of[phrase.text.as_str()]];
        let mut best = Scalar::NEG_INFINITY;
        for &si in &source_indices {
            let sv = &vectors[si];
            // Bit-identical vectors (e.g. canonicalized synonyms) are a true
            // cosine of 1; do not let rounding in sqrt decide the match.
            let sim = if ev == sv { 1.0 } else { cosine_similarity(ev, sv)? };
            if sim > best {
                best = sim;
                if best >= 1.0 {
                    break;
                }
            }
        }
        if best >= tau {
            matched += 1;
        }
    }
    Ok(matched as Scalar / edited_phrases.len() as Scalar)
}

/// Turns a raw metric score into an edit magnitude: 0 means no detectable
/// change, larger means heavier editing.
pub fn edit_magnitude<T: Real>(raw: T, kind: MetricKind) -> T {
    match kind {
        MetricKind::CosineDistance => raw,
        MetricKind::SoftNgrams => T::one() - raw,
    }
}

/// Piecewise-linear scaled score: 0 at or below `tau_low`, 1 at or above
/// `tau_high`, linear between. Monotone non-decreasing in `s`.
pub fn scale_target<T: Real>(s: T, spec: &ScaleSpec<T>) -> T {
    debug_assert!(s.is_finite(), "scale_target requires finite input");
    if s <= spec.tau_low {
        T::zero()
    } else if s >= spec.tau_high {
        T::one()
    } else {
        (s - spec.tau_low) / (spec.tau_high - spec.tau_low)
    }
}

/// Bucket assignment: `min(n-1, floor((s - tau_min) / width * n))`, clamped
/// below at 0 so scores under `tau_min` land in the first bucket.
pub fn bucket_of<T: Real>(s: T, spec: &BucketSpec<T>) -> usize {
    debug_assert!(s.is_finite(), "bucket_of requires finite input");
    if s < spec.tau_min {
        return 0;
    }
    let n = T::from_usize(spec.n).expect("bucket count fits scalar");
    let scaled = (s - spec.tau_min) / (spec.tau_max - spec.tau_min) * n;
    let idx = scaled.floor().to_usize().unwrap_or(0);
    idx.min(spec.n - 1)
}

/// Midpoint of bucket `j`: `tau_min + (j + 0.5) * width / n`.
pub fn bucket_midpoint<T: Real>(j: usize, spec: &BucketSpec<T>) -> Result<T> {
    if j >= spec.n {
        return Err(Error::invalid(format!(
            "bucket index {j} out of range for n={}",
            spec.n
        )));
    }
    let n = T::from_usize(spec.n).expect("bucket count fits scalar");
    let j = T::from_usize(j).expect("bucket index fits scalar");
    let half = T::from_f64_const(0.5);
    Ok(spec.tau_min + (j + half) * (spec.tau_max - spec.tau_min) / n)
}

/// Weighted-average decoding: the probability-weighted mean of bucket
/// midpoints. The result always lies in `[m_0, m_{n-1}]`.
pub fn decode_weighted<T: Real>(probs: &[T], spec: &BucketSpec<T>) -> Result<T> {
    if probs.len() != spec.n {
        return Err(Error::invalid(format!(
            "expected {} probabilities, got {}",
            spec.n,
            probs.len()
        )));
    }
    let mut sum = T::zero();
    for &p in probs {
        if !(p >= T::zero()) {
            return Err(Error::invalid(format!("negative probability {p}")));
        }
        sum += p;
    }
    if (sum - T::one()).abs() > T::from_f64_const(1e-6) {
        return Err(Error::invalid(format!("probabilities sum to {sum}, expected 1")));
    }
    let mut score = T::zero();
    for (j, &p) in probs.iter().enumerate() {
        score += p / sum * bucket_midpoint(j, spec)?;
    }
    Ok(score)
}

/// Index of the maximum probability; ties break toward the lower index.
pub fn decode_argmax<T: Real>(probs: &[T]) -> Result<usize> {
    if probs.is_empty() {
        return Err(Error::invalid("argmax of empty probability vector"));
    }
    let mut best = 0usize;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Maps a raw-domain score (e.g. a weighted decode) onto the `[0, 1]`
/// reporting scale of the bucket range.
pub fn normalize_score<T: Real>(s_raw: T, spec: &BucketSpec<T>) -> T {
    scale_target(s_raw, &spec.scale())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{build_embedder, DeterministicEmbedder, ProviderKind};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn test_embedder(dim: usize, seed: u64) -> Box<dyn Embedder> {
        build_embedder(&EmbedderConfig {
            provider_kind: ProviderKind::DeterministicTest,
            dim,
            seed,
            ..EmbedderConfig::default()
        })
        .unwrap()
    }

    fn plain_embedder(dim: usize, seed: u64) -> DeterministicEmbedder {
        let config = EmbedderConfig {
            dim,
            seed,
            use_synonyms: false,
            ..EmbedderConfig::default()
        };
        DeterministicEmbedder::new(config).unwrap()
    }

    fn cosine_spec() -> BucketSpec<f64> {
        BucketSpec::new(4, 0.03, 0.15).unwrap()
    }

    // --- cosine distance ---

    #[test]
    fn identical_texts_have_zero_distance() {
        let e = test_embedder(64, 1);
        for t in ["hello there", "a", "the quick brown fox"] {
            assert!(cosine_distance_score(t, t, e.as_ref()).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn disjoint_vocabulary_is_near_orthogonal() {
        let e = test_embedder(512, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let left: Vec<String> = (0..20).map(|_| format!("lw{}", rng.gen_range(0..5000u32))).collect();
            let right: Vec<String> = (0..20).map(|_| format!("rw{}", rng.gen_range(0..5000u32))).collect();
            let d = cosine_distance_score(&left.join(" "), &right.join(" "), e.as_ref()).unwrap();
            assert!((0.8..=1.2).contains(&d), "distance {d} outside [0.8, 1.2]");
        }
    }

    #[test]
    fn small_edit_sits_between_identity_and_disjoint() {
        let e = test_embedder(512, 2);
        let d = cosine_distance_score("the cat sat", "the cat sat quickly", e.as_ref()).unwrap();
        assert!(d > 1e-9 && d < 0.8, "got {d}");
    }

    #[test]
    fn empty_text_rejected() {
        let e = test_embedder(16, 1);
        assert!(cosine_distance_score("", "x", e.as_ref()).is_err());
        assert!(cosine_distance_score("x", " ", e.as_ref()).is_err());
    }

    // --- soft n-grams ---

    /// Independent oracle: exact windowed n-gram overlap precision.
    fn exact_overlap_precision(source: &str, edited: &str, a: usize, b: usize) -> f64 {
        fn windows(text: &str, a: usize, b: usize) -> Vec<Vec<String>> {
            let words = tokenize_words(text);
            let mut out = Vec::new();
            if words.is_empty() {
                return out;
            }
            if words.len() < a {
                out.push(words);
                return out;
            }
            for n in a..=b.min(words.len()) {
                for start in 0..=(words.len() - n) {
                    out.push(words[start..start + n].to_vec());
                }
            }
            out
        }
        let source_set: std::collections::HashSet<Vec<String>> =
            windows(source, a, b).into_iter().collect();
        let edited_windows = windows(edited, a, b);
        let matched = edited_windows.iter().filter(|w| source_set.contains(*w)).count();
        matched as f64 / edited_windows.len() as f64
    }

    #[test]
    fn identity_gives_precision_one() {
        let e = plain_embedder(64, 3);
        let t = "the cat sat on the mat";
        assert_eq!(soft_ngrams_precision(t, t, 1, 2, 1.0, &e).unwrap(), 1.0);
        assert_eq!(soft_ngrams_precision(t, t, 3, 5, 0.85, &e).unwrap(), 1.0);
    }

    #[test]
    fn deletion_from_source_keeps_precision_one() {
        let e = plain_embedder(64, 3);
        let got = soft_ngrams_precision("the cat sat on the mat", "the cat sat", 1, 2, 1.0, &e).unwrap();
        assert_eq!(got, 1.0);
    }

    #[test]
    fn unigram_overlap_matches_hand_count() {
        let e = plain_embedder(64, 3);
        let got = soft_ngrams_precision("the cat sat", "the dog sat", 1, 1, 1.0, &e).unwrap();
        assert!((got - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(got, exact_overlap_precision("the cat sat", "the dog sat", 1, 1));
    }

    #[test]
    fn tau_one_equals_exact_overlap_on_random_pairs() {
        let e = plain_embedder(48, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..25 {
            let len = rng.gen_range(5..40);
            let source: Vec<String> = (0..len).map(|_| format!("v{}", rng.gen_range(0..400u32))).collect();
            // Substitutions and a deletion, order preserved.
            let mut edited = source.clone();
            for _ in 0..rng.gen_range(0..4) {
                let i = rng.gen_range(0..edited.len());
                edited[i] = format!("sub{}", rng.gen_range(0..50u32));
            }
            if edited.len() > 3 {
                let i = rng.gen_range(0..edited.len());
                edited.remove(i);
            }
            let source = source.join(" ");
            let edited = edited.join(" ");
            for (a, b) in [(1, 1), (1, 3), (2, 4)] {
                let soft = soft_ngrams_precision(&source, &edited, a, b, 1.0, &e).unwrap();
                let exact = exact_overlap_precision(&source, &edited, a, b);
                assert_eq!(soft, exact, "a={a} b={b} src={source} edit={edited}");
            }
        }
    }

    #[test]
    fn lower_tau_admits_near_matches() {
        // Synonym-canonicalized embedder: "big" and "large" share a vector,
        // so a synonym swap still matches even at tau just under 1.
        let e = test_embedder(64, 3);
        let got = soft_ngrams_precision("the big cat sat", "the large cat sat", 1, 2, 0.99, e.as_ref()).unwrap();
        assert_eq!(got, 1.0);
    }

    #[test]
    fn no_phrases_in_edited_is_invalid() {
        let e = plain_embedder(16, 1);
        assert!(soft_ngrams_precision("some text", "...", 1, 2, 1.0, &e).is_err());
    }

    #[test]
    fn invalid_tau_rejected() {
        let e = plain_embedder(16, 1);
        assert!(soft_ngrams_precision("a b", "a b", 1, 2, 0.0, &e).is_err());
        assert!(soft_ngrams_precision("a b", "a b", 1, 2, 1.5, &e).is_err());
    }

    // --- edit magnitude ---

    #[test]
    fn edit_magnitude_orientation() {
        assert_eq!(edit_magnitude(0.0, MetricKind::CosineDistance), 0.0);
        assert_eq!(edit_magnitude(0.37, MetricKind::CosineDistance), 0.37);
        assert_eq!(edit_magnitude(1.0, MetricKind::SoftNgrams), 0.0);
        assert!((edit_magnitude(0.28f64, MetricKind::SoftNgrams) - 0.72).abs() < 1e-15);
    }

    // --- scale / bucket algebra ---

    #[test]
    fn scale_target_clamps_and_interpolates() {
        let spec = ScaleSpec::<f64>::new(0.03, 0.15).unwrap();
        assert_eq!(scale_target(0.02, &spec), 0.0);
        assert_eq!(scale_target(0.03, &spec), 0.0);
        assert_eq!(scale_target(0.15, &spec), 1.0);
        assert!((scale_target(0.09, &spec) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bucket_assignment_examples() {
        let spec = cosine_spec();
        assert_eq!(bucket_of(0.03, &spec), 0);
        assert_eq!(bucket_of(0.99, &spec), 3);
        assert_eq!(bucket_of(0.10, &spec), 2);
        assert_eq!(bucket_of(0.00, &spec), 0);
        assert_eq!(bucket_of(-0.5, &spec), 0);
    }

    #[test]
    fn midpoint_examples() {
        let spec = cosine_spec();
        assert!((bucket_midpoint(0, &spec).unwrap() - 0.045).abs() < 1e-15);
        assert!((bucket_midpoint(2, &spec).unwrap() - 0.105).abs() < 1e-15);
        assert!((bucket_midpoint(3, &spec).unwrap() - 0.135).abs() < 1e-15);
        assert!(bucket_midpoint(4, &spec).is_err());
    }

    #[test]
    fn decode_weighted_examples() {
        let spec = cosine_spec();
        let one_hot = [0.0, 0.0, 1.0, 0.0];
        assert!((decode_weighted(&one_hot, &spec).unwrap() - 0.105).abs() < 1e-12);
        let uniform = [0.25; 4];
        assert!((decode_weighted(&uniform, &spec).unwrap() - 0.09).abs() < 1e-12);
        let split = [0.5, 0.0, 0.0, 0.5];
        assert!((decode_weighted(&split, &spec).unwrap() - 0.09).abs() < 1e-12);
    }

    #[test]
    fn decode_weighted_validates_input() {
        let spec = cosine_spec();
        assert!(decode_weighted(&[0.5, 0.5], &spec).is_err());
        assert!(decode_weighted(&[0.5, 0.5, 0.5, -0.5], &spec).is_err());
        assert!(decode_weighted(&[0.5, 0.2, 0.2, 0.2], &spec).is_err());
    }

    #[test]
    fn argmax_ties_break_low() {
        assert_eq!(decode_argmax(&[0.1, 0.7, 0.2]).unwrap(), 1);
        assert_eq!(decode_argmax(&[0.5, 0.5]).unwrap(), 0);
        assert_eq!(decode_argmax(&[1.0]).unwrap(), 0);
        assert!(decode_argmax::<f64>(&[]).is_err());
    }

    #[test]
    fn normalize_score_examples() {
        let spec = cosine_spec();
        assert!((normalize_score(0.045, &spec) - 0.125).abs() < 1e-12);
        assert!((normalize_score(0.135, &spec) - 0.875).abs() < 1e-12);
        assert_eq!(normalize_score(0.30, &spec), 1.0);
    }

    #[test]
    fn algebra_works_at_f32() {
        let spec = BucketSpec::<f32>::new(4, 0.03, 0.15).unwrap();
        assert_eq!(bucket_of(0.10f32, &spec), 2);
        assert!((bucket_midpoint(0, &spec).unwrap() - 0.045f32).abs() < 1e-6);
    }

    #[test]
    fn midpoint_round_trips_through_bucket_of() {
        for n in 2..=8 {
            for &(lo, hi) in &[(0.03, 0.15), (0.06, 0.72)] {
                let spec = BucketSpec::new(n, lo, hi).unwrap();
                for j in 0..n {
                    let m = bucket_midpoint(j, &spec).unwrap();
                    assert_eq!(bucket_of(m, &spec), j, "n={n} j={j} range=({lo},{hi})");
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn scale_target_is_monotone(
                s1 in -0.5f64..1.5,
                s2 in -0.5f64..1.5,
                lo in 0.0f64..0.4,
                width in 0.05f64..1.0,
            ) {
                let spec = ScaleSpec::new(lo, lo + width).unwrap();
                let (a, b) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
                prop_assert!(scale_target(a, &spec) <= scale_target(b, &spec));
            }

            #[test]
            fn decode_stays_within_midpoint_range(
                raw in proptest::collection::vec(0.0f64..1.0, 2..=8),
            ) {
                let sum: f64 = raw.iter().sum();
                prop_assume!(sum > 1e-9);
                let probs: Vec<f64> = raw.iter().map(|p| p / sum).collect();
                let spec = BucketSpec::new(probs.len(), 0.03, 0.15).unwrap();
                let decoded = decode_weighted(&probs, &spec).unwrap();
                let lo = bucket_midpoint(0, &spec).unwrap();
                let hi = bucket_midpoint(spec.n - 1, &spec).unwrap();
                prop_assert!(decoded >= lo - 1e-12 && decoded <= hi + 1e-12);
            }

            #[test]
            fn bucket_of_is_monotone(
                s1 in -0.5f64..1.5,
                s2 in -0.5f64..1.5,
            ) {
                let spec = cosine_spec();
                let (a, b) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
                prop_assert!(bucket_of(a, &spec) <= bucket_of(b, &spec));
            }
        }
    }
}
