//! Turns source/edited pairs into supervised examples and manages
//! prompt-disjoint dataset splits and summary statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::embedding::{hash64, Embedder};
use crate::error::{Error, Result};
use crate::segmentation::tokenize_words;
use crate::simmetrics::{
    bucket_of, cosine_distance_score, scale_target, soft_ngrams_precision, MetricKind,
};
use crate::{Buckets, Scalar, Scale};

/// The nine prompt categories; label space of the auxiliary prompt head.
pub const PROMPT_CATEGORIES: [&str; 9] = [
    "Tone and Style Adjustments",
    "Adding Detail",
    "Concision",
    "Fluency and Flow",
    "Paraphrasing",
    "Structure and Organization",
    "General Improvement",
    "Clarity and Precision",
    "Grammar and Mechanics",
];

/// Index of a prompt category in [`PROMPT_CATEGORIES`].
pub fn prompt_category_index(name: &str) -> Option<usize> {
    PROMPT_CATEGORIES.iter().position(|&c| c == name)
}

/// Who produced the edit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Editor {
    Human,
    Llm,
    Rule,
}

/// Dataset split membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

/// The three decision classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TernaryClass {
    Human,
    AiEdited,
    AiGenerated,
}

impl TernaryClass {
    pub const ALL: [TernaryClass; 3] = [
        TernaryClass::Human,
        TernaryClass::AiEdited,
        TernaryClass::AiGenerated,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TernaryClass::Human => "human",
            TernaryClass::AiEdited => "ai_edited",
            TernaryClass::AiGenerated => "ai_generated",
        }
    }
}

/// A human source text and its edited counterpart plus provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocumentPair {
    pub id: String,
    pub source_text: String,
    pub edited_text: String,
    pub editor: Editor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_category: Option<String>,
    #[serde(default)]
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

/// A labeled single-input example: the edited text with its supervision
/// score, scaled target, bucket, and ternary class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    pub metric_kind: MetricKind,
    /// Distance orientation: 0 means no detectable change.
    pub raw_score: Scalar,
    pub target: Scalar,
    pub bucket: usize,
    pub ternary: TernaryClass,
    pub split: Split,
    /// True when `raw_score` is the recorded upper-threshold sentinel of a
    /// fully-AI text rather than a computed distance.
    pub sentinel: bool,
    /// Carried through for the auxiliary prompt-category head.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_category: Option<String>,
}

impl LabeledExample {
    /// Checks the label-consistency invariants against the thresholds that
    /// produced this example.
    pub fn validate(&self, scale: &Scale, buckets: &Buckets) -> Result<()> {
        if self.text.trim().is_empty() {
            return Err(Error::invalid(format!("example {}: empty text", self.id)));
        }
        let (target, bucket, ternary) = label_from_raw(self.raw_score, scale, buckets);
        if self.target != target || self.bucket != bucket || self.ternary != ternary {
            return Err(Error::invalid(format!(
                "example {}: labels inconsistent with raw score {}",
                self.id, self.raw_score
            )));
        }
        Ok(())
    }
}

/// Maps a raw distance onto (scaled target, bucket, ternary class).
///
/// Boundary convention: `raw == tau_low` is still human, `raw == tau_high`
/// is already AI-generated, matching the scaled-score clamps.
pub fn label_from_raw(raw: Scalar, scale: &Scale, buckets: &Buckets) -> (Scalar, usize, TernaryClass) {
    let target = scale_target(raw, scale);
    let bucket = bucket_of(raw, buckets);
    let ternary = if raw <= scale.tau_low {
        TernaryClass::Human
    } else if raw >= scale.tau_high {
        TernaryClass::AiGenerated
    } else {
        TernaryClass::AiEdited
    };
    (target, bucket, ternary)
}

/// Computes the raw distance-oriented supervision score for a pair.
pub enum MetricComputer<'a> {
    Cosine {
        doc_embedder: &'a dyn Embedder,
    },
    SoftNgrams {
        a: usize,
        b: usize,
        tau: Scalar,
        phrase_embedder: &'a dyn Embedder,
    },
}

impl<'a> MetricComputer<'a> {
    pub fn kind(&self) -> MetricKind {
        match self {
            MetricComputer::Cosine { .. } => MetricKind::CosineDistance,
            MetricComputer::SoftNgrams { .. } => MetricKind::SoftNgrams,
        }
    }

    /// Raw score in distance orientation (soft n-grams precision is flipped
    /// to `1 - precision`).
    pub fn raw_distance(&self, source: &str, edited: &str) -> Result<Scalar> {
        match self {
            MetricComputer::Cosine { doc_embedder } => {
                cosine_distance_score(source, edited, *doc_embedder)
            }
            MetricComputer::SoftNgrams {
                a,
                b,
                tau,
                phrase_embedder,
            } => Ok(1.0 - soft_ngrams_precision(source, edited, *a, *b, *tau, *phrase_embedder)?),
        }
    }
}

/// Labels pairs under one metric and one threshold configuration.
pub struct Labeler<'a> {
    pub metric: MetricComputer<'a>,
    pub scale: Scale,
    pub buckets: Buckets,
}

impl<'a> Labeler<'a> {
    /// Labels one pair. The labeled text is the edited text: the scorer
    /// sees only the edit result, never the source.
    pub fn label_pair(&self, pair: &DocumentPair) -> Result<LabeledExample> {
        let split = pair.split.ok_or_else(|| {
            Error::invalid(format!("pair {}: no split assigned", pair.id))
        })?;
        let raw = self
            .metric
            .raw_distance(&pair.source_text, &pair.edited_text)?;
        let (target, bucket, ternary) = label_from_raw(raw, &self.scale, &self.buckets);
        Ok(LabeledExample {
            id: pair.id.clone(),
            text: pair.edited_text.clone(),
            metric_kind: self.metric.kind(),
            raw_score: raw,
            target,
            bucket,
            ternary,
            split,
            sentinel: false,
            prompt_category: pair.prompt_category.clone(),
        })
    }

    /// Labels a fully-AI text: target 1.0, top bucket, AI-generated class.
    /// The raw score records the upper threshold as a flagged sentinel, not
    /// a computed distance.
    pub fn label_fully_ai(&self, id: &str, text: &str, split: Split) -> Result<LabeledExample> {
        if text.trim().is_empty() {
            return Err(Error::invalid(format!("fully-AI text {id} is empty")));
        }
        let raw = self.scale.tau_high;
        let (target, bucket, ternary) = label_from_raw(raw, &self.scale, &self.buckets);
        Ok(LabeledExample {
            id: id.to_string(),
            text: text.to_string(),
            metric_kind: self.metric.kind(),
            raw_score: raw,
            target,
            bucket,
            ternary,
            split,
            sentinel: true,
            prompt_category: None,
        })
    }
}

/// Assigns every pair to a split such that each prompt id lands in exactly
/// one split. Pairs without a prompt id are split i.i.d. by a hash of their
/// id. Deterministic in `seed` and independent of input order.
pub fn split_by_prompt(
    pairs: &[DocumentPair],
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<HashMap<String, Split>> {
    let (f_train, f_val, f_test) = fractions;
    if f_train < 0.0 || f_val < 0.0 || f_test < 0.0 {
        return Err(Error::invalid("split fractions must be non-negative"));
    }
    if (f_train + f_val + f_test - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "split fractions must sum to 1, got {}",
            f_train + f_val + f_test
        )));
    }
    let mut seen = BTreeSet::new();
    for pair in pairs {
        if !seen.insert(pair.id.as_str()) {
            return Err(Error::invalid(format!("duplicate pair id: {}", pair.id)));
        }
    }

    let prompts: BTreeSet<&str> = pairs
        .iter()
        .filter_map(|p| p.prompt_id.as_deref())
        .collect();
    let nonzero = [f_train, f_val, f_test].iter().filter(|&&f| f > 0.0).count();
    if !prompts.is_empty() && prompts.len() < nonzero {
        return Err(Error::InsufficientPrompts(format!(
            "{} distinct prompt ids cannot fill {} nonzero split fractions",
            prompts.len(),
            nonzero
        )));
    }

    let mut prompt_list: Vec<&str> = prompts.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    prompt_list.shuffle(&mut rng);
    let total = prompt_list.len() as f64;
    let b1 = (f_train * total).round() as usize;
    let b2 = ((f_train + f_val) * total).round() as usize;
    let mut prompt_split: HashMap<&str, Split> = HashMap::new();
    for (i, prompt) in prompt_list.iter().enumerate() {
        let split = if i < b1 {
            Split::Train
        } else if i < b2 {
            Split::Val
        } else {
            Split::Test
        };
        prompt_split.insert(prompt, split);
    }

    let mut assignment = HashMap::with_capacity(pairs.len());
    for pair in pairs {
        let split = match pair.prompt_id.as_deref() {
            Some(prompt) => prompt_split[prompt],
            None => {
                // Order-independent i.i.d. draw from (seed, id).
                let h = hash64(&[&seed.to_le_bytes(), pair.id.as_bytes()]);
                let u = (h >> 11) as f64 / (1u64 << 53) as f64;
                if u < f_train {
                    Split::Train
                } else if u < f_train + f_val {
                    Split::Val
                } else {
                    Split::Test
                }
            }
        };
        assignment.insert(pair.id.clone(), split);
    }
    Ok(assignment)
}

/// Applies a split assignment to pairs in place.
pub fn apply_split(pairs: &mut [DocumentPair], assignment: &HashMap<String, Split>) {
    for pair in pairs {
        if let Some(split) = assignment.get(&pair.id) {
            pair.split = Some(*split);
        }
    }
}

/// Per-(split, class) counts and word-count statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub split: Split,
    pub ternary: TernaryClass,
    pub count: usize,
    pub word_mean: Scalar,
    pub word_min: usize,
    pub word_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total: usize,
    pub rows: Vec<StatsRow>,
}

/// Exact counts and word statistics per (split, ternary) cell; empty input
/// produces an all-zero report.
pub fn dataset_stats(examples: &[LabeledExample]) -> DatasetStats {
    let mut cells: BTreeMap<(Split, TernaryClass), Vec<usize>> = BTreeMap::new();
    for example in examples {
        let words = tokenize_words(&example.text).len();
        cells
            .entry((example.split, example.ternary))
            .or_default()
            .push(words);
    }
    let rows = cells
        .into_iter()
        .map(|((split, ternary), counts)| {
            let count = counts.len();
            StatsRow {
                split,
                ternary,
                count,
                word_mean: counts.iter().sum::<usize>() as Scalar / count as Scalar,
                word_min: counts.iter().copied().min().unwrap_or(0),
                word_max: counts.iter().copied().max().unwrap_or(0),
            }
        })
        .collect();
    DatasetStats {
        total: examples.len(),
        rows,
    }
}
