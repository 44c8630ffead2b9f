//! Inter-rater agreement: Krippendorff's alpha for nominal data with
//! missing values, metric-as-rater conversion, and bootstrap standard
//! errors over unit resamples.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::simmetrics::bucket_of;
use crate::{Buckets, Scalar};

/// A units-by-raters table of nominal ratings with a missing marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingsMatrix<V> {
    raters: usize,
    values: Vec<Vec<Option<V>>>,
}

impl<V: Clone> RatingsMatrix<V> {
    /// Builds the matrix from one row per unit; all rows must have the same
    /// number of rater columns.
    pub fn new(values: Vec<Vec<Option<V>>>) -> Result<Self> {
        let raters = values.first().map(|row| row.len()).unwrap_or(0);
        if raters < 2 {
            return Err(Error::invalid("ratings matrix needs at least 2 raters"));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != raters {
                return Err(Error::invalid(format!(
                    "unit {i} has {} ratings, expected {raters}",
                    row.len()
                )));
            }
        }
        Ok(RatingsMatrix { raters, values })
    }

    pub fn units(&self) -> usize {
        self.values.len()
    }

    pub fn raters(&self) -> usize {
        self.raters
    }

    pub fn rows(&self) -> &[Vec<Option<V>>] {
        &self.values
    }

    /// A new matrix over the given unit indices (with repetition), as drawn
    /// by a bootstrap resample.
    pub fn resample(&self, unit_indices: &[usize]) -> Self {
        RatingsMatrix {
            raters: self.raters,
            values: unit_indices.iter().map(|&i| self.values[i].clone()).collect(),
        }
    }
}

/// Measurement level for the agreement coefficient. The rating domains used
/// here ({first, second, tie}) are unordered, so only nominal is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Nominal,
}

/// Krippendorff's alpha via the coincidence matrix: each unit with `m >= 2`
/// non-missing values contributes its ordered value pairs at weight
/// `1/(m - 1)`; observed disagreement is the off-diagonal mass over `n`,
/// expected disagreement the off-diagonal product mass over `n(n-1)`.
pub fn krippendorff_alpha<V: Eq + std::hash::Hash + Ord + Clone>(
    ratings: &RatingsMatrix<V>,
    _level: Level,
) -> Result<Scalar> {
    // Deterministic value indexing: sorted domain.
    let mut domain: Vec<&V> = Vec::new();
    {
        let mut seen = HashMap::new();
        for row in ratings.rows() {
            for value in row.iter().flatten() {
                seen.entry(value).or_insert(());
            }
        }
        domain.extend(seen.into_keys());
        domain.sort();
    }
    let index: HashMap<&V, usize> = domain.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let k = domain.len();
    let mut coincidence = vec![vec![0.0f64; k]; k];
    let mut pairable = false;
    for row in ratings.rows() {
        let present: Vec<usize> = row.iter().flatten().map(|v| index[v]).collect();
        let m = present.len();
        if m < 2 {
            continue;
        }
        pairable = true;
        let weight = 1.0 / (m as f64 - 1.0);
        for (i, &a) in present.iter().enumerate() {
            for (j, &b) in present.iter().enumerate() {
                if i != j {
                    coincidence[a][b] += weight;
                }
            }
        }
    }
    if !pairable {
        return Err(Error::InsufficientData(
            "no unit has two or more ratings".to_string(),
        ));
    }
    let totals: Vec<f64> = coincidence.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = totals.iter().sum();
    let mut observed_off = 0.0;
    let mut expected_off = 0.0;
    for c in 0..k {
        for l in 0..k {
            if c != l {
                observed_off += coincidence[c][l];
                expected_off += totals[c] * totals[l];
            }
        }
    }
    let d_e = expected_off / (n * (n - 1.0));
    if d_e == 0.0 {
        return Err(Error::DegenerateData(
            "all ratings identical; expected disagreement is zero".to_string(),
        ));
    }
    let d_o = observed_off / n;
    Ok(1.0 - d_o / d_e)
}

/// Which of two texts a metric "selects" as containing more editing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    First,
    Second,
    Tie,
}

/// How score pairs are compared when the metric acts as a rater.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TieMode {
    /// Tie only on exact score equality.
    Strict,
    /// Compare bucket indices; same bucket is a tie.
    Bucketed(Buckets),
}

/// Converts score pairs into rater selections: the higher-scoring text is
/// the metric's choice.
pub fn metric_as_rater(pair_scores: &[(Scalar, Scalar)], tie_mode: TieMode) -> Vec<Selection> {
    pair_scores
        .iter()
        .map(|&(s1, s2)| match tie_mode {
            TieMode::Strict => {
                if s1 > s2 {
                    Selection::First
                } else if s2 > s1 {
                    Selection::Second
                } else {
                    Selection::Tie
                }
            }
            TieMode::Bucketed(spec) => {
                let b1 = bucket_of(s1, &spec);
                let b2 = bucket_of(s2, &spec);
                if b1 > b2 {
                    Selection::First
                } else if b2 > b1 {
                    Selection::Second
                } else {
                    Selection::Tie
                }
            }
        })
        .collect()
}

/// Bootstrap standard error of a statistic under unit-level resampling with
/// replacement. Deterministic in `seed`. Fails as `UnstableStatistic` when
/// the statistic errors on more than half the resamples.
pub fn bootstrap_se<V: Clone, F>(
    statistic: F,
    ratings: &RatingsMatrix<V>,
    b: usize,
    seed: u64,
) -> Result<Scalar>
where
    F: Fn(&RatingsMatrix<V>) -> Result<Scalar>,
{
    if b < 2 {
        return Err(Error::invalid("bootstrap needs at least 2 resamples"));
    }
    let units = ratings.units();
    if units == 0 {
        return Err(Error::InsufficientData("no units to resample".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(b);
    let mut failures = 0usize;
    for _ in 0..b {
        let indices: Vec<usize> = (0..units).map(|_| rng.gen_range(0..units)).collect();
        match statistic(&ratings.resample(&indices)) {
            Ok(value) => samples.push(value),
            Err(_) => failures += 1,
        }
    }
    if failures * 2 > b {
        return Err(Error::UnstableStatistic(format!(
            "statistic failed on {failures}/{b} resamples"
        )));
    }
    if samples.len() < 2 || samples.iter().all(|&s| s == samples[0]) {
        return Ok(0.0);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>();
    Ok((ss / (n - 1.0)).sqrt())
}
