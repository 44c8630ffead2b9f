//! Converts continuous scores into binary or ternary decisions via
//! F1-optimal thresholds fitted on a validation set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalmetrics::{confusion_and_f1, f1_from_counts};
use crate::labeler::TernaryClass;
use crate::scalar::Real;

/// Which decision the thresholds implement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationTask {
    /// Human vs. anything AI-touched.
    HumanVsAnyAi,
    /// Fully AI-generated vs. everything else.
    FullyAiVsRest,
    /// Human / AI-edited / AI-generated via two thresholds.
    Ternary,
}

/// Fitted thresholds with their fit-set F1 and sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub task: CalibrationTask,
    pub thresholds: Vec<f64>,
    pub fit_f1: Vec<f64>,
    pub n_val: usize,
}

/// Finds the threshold maximizing F1 of "score >= threshold => positive".
///
/// Candidates are the midpoints between consecutive distinct sorted scores
/// plus one candidate below the minimum and one above the maximum. F1 ties
/// break toward the larger threshold.
pub fn calibrate_binary<T: Real>(scores: &[T], labels: &[bool]) -> Result<(T, f64)> {
    if scores.len() != labels.len() {
        return Err(Error::invalid(format!(
            "score/label length mismatch: {} vs {}",
            scores.len(),
            labels.len()
        )));
    }
    if scores.is_empty() {
        return Err(Error::invalid("cannot calibrate on an empty set"));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::DegenerateLabels(
            "binary calibration needs both classes present".to_string(),
        ));
    }
    let mut best: Option<(T, f64)> = None;
    for threshold in candidate_thresholds(scores) {
        let f1 = binary_f1_at(scores, labels, threshold);
        let replace = match best {
            None => true,
            Some((_, best_f1)) => f1 >= best_f1,
        };
        if replace {
            best = Some((threshold, f1));
        }
    }
    Ok(best.expect("candidate set is never empty"))
}

/// Candidate thresholds for a score set, in increasing order.
pub fn candidate_thresholds<T: Real>(scores: &[T]) -> Vec<T> {
    let mut distinct: Vec<T> = scores.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("scores must be comparable"));
    distinct.dedup();
    let mut candidates = Vec::with_capacity(distinct.len() + 1);
    candidates.push(distinct[0] - T::one());
    let half = T::from_f64_const(0.5);
    for pair in distinct.windows(2) {
        candidates.push((pair[0] + pair[1]) * half);
    }
    candidates.push(distinct[distinct.len() - 1] + T::one());
    candidates
}

/// F1 of the positive class under "score >= threshold => positive".
pub fn binary_f1_at<T: Real>(scores: &[T], labels: &[bool], threshold: T) -> f64 {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (&score, &label) in scores.iter().zip(labels) {
        let predicted = score >= threshold;
        match (predicted, label) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    f1_from_counts(tp, fp, fn_)
}

/// Fits the two ternary thresholds: `t1` separates human from anything AI,
/// `t2` separates fully-AI from the rest, each by the binary procedure. If
/// the fits cross (`t1 > t2`) both collapse to their average so the decision
/// rule stays total. Returns `(t1, t2, macro_f1)` with macro-F1 measured on
/// the calibration set itself.
pub fn calibrate_ternary<T: Real>(
    scores: &[T],
    labels: &[TernaryClass],
) -> Result<(T, T, f64)> {
    if scores.len() != labels.len() {
        return Err(Error::invalid(format!(
            "score/label length mismatch: {} vs {}",
            scores.len(),
            labels.len()
        )));
    }
    for class in TernaryClass::ALL {
        if !labels.contains(&class) {
            return Err(Error::DegenerateLabels(format!(
                "ternary calibration needs all three classes; missing {}",
                class.name()
            )));
        }
    }
    let any_ai: Vec<bool> = labels.iter().map(|&l| l != TernaryClass::Human).collect();
    let fully_ai: Vec<bool> = labels
        .iter()
        .map(|&l| l == TernaryClass::AiGenerated)
        .collect();
    let (mut t1, _) = calibrate_binary(scores, &any_ai)?;
    let (mut t2, _) = calibrate_binary(scores, &fully_ai)?;
    if t1 > t2 {
        let mid = (t1 + t2) * T::from_f64_const(0.5);
        t1 = mid;
        t2 = mid;
    }
    let preds: Vec<TernaryClass> = scores
        .iter()
        .map(|&s| classify_ternary(s, t1, t2).expect("t1 <= t2 by construction"))
        .collect();
    let report = confusion_and_f1(&preds, labels, &TernaryClass::ALL)?;
    Ok((t1, t2, report.macro_f1))
}

/// Two-threshold decision rule: below `t1` is human, at or above `t2` is
/// AI-generated, otherwise AI-edited.
pub fn classify_ternary<T: Real>(score: T, t1: T, t2: T) -> Result<TernaryClass> {
    if t1 > t2 {
        return Err(Error::invalid(format!(
            "ternary thresholds out of order: {t1} > {t2}"
        )));
    }
    Ok(if score >= t2 {
        TernaryClass::AiGenerated
    } else if score < t1 {
        TernaryClass::Human
    } else {
        TernaryClass::AiEdited
    })
}
