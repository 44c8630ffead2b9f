//! Evaluation statistics: confusion matrices and F1, Pearson correlation,
//! MSE, paired mean differences, and histogram emission.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Confusion matrix (rows = label, columns = prediction) with per-class F1,
/// macro-F1, and accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub matrix: Vec<Vec<usize>>,
    pub per_class_f1: Vec<f64>,
    pub macro_f1: f64,
    pub accuracy: f64,
}

/// Standard confusion/F1 computation over the caller's class set. Macro-F1
/// averages over exactly `classes`, absent classes contributing 0.
pub fn confusion_and_f1<C: PartialEq>(
    preds: &[C],
    labels: &[C],
    classes: &[C],
) -> Result<ClassificationReport> {
    if preds.len() != labels.len() {
        return Err(Error::invalid(format!(
            "prediction/label length mismatch: {} vs {}",
            preds.len(),
            labels.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::invalid("cannot evaluate an empty prediction set"));
    }
    if classes.is_empty() {
        return Err(Error::invalid("class set must be non-empty"));
    }
    let index_of = |value: &C| -> Result<usize> {
        classes
            .iter()
            .position(|c| c == value)
            .ok_or_else(|| Error::invalid("value outside the declared class set"))
    };
    let k = classes.len();
    let mut matrix = vec![vec![0usize; k]; k];
    let mut correct = 0usize;
    for (pred, label) in preds.iter().zip(labels) {
        let p = index_of(pred)?;
        let l = index_of(label)?;
        matrix[l][p] += 1;
        if p == l {
            correct += 1;
        }
    }
    let mut per_class_f1 = Vec::with_capacity(k);
    for c in 0..k {
        let tp = matrix[c][c];
        let fp: usize = (0..k).filter(|&l| l != c).map(|l| matrix[l][c]).sum();
        let fn_: usize = (0..k).filter(|&p| p != c).map(|p| matrix[c][p]).sum();
        per_class_f1.push(f1_from_counts(tp, fp, fn_));
    }
    let macro_f1 = per_class_f1.iter().sum::<f64>() / k as f64;
    Ok(ClassificationReport {
        matrix,
        per_class_f1,
        macro_f1,
        accuracy: correct as f64 / preds.len() as f64,
    })
}

/// F1 with the 0-when-undefined convention.
pub fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> f64 {
    let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
    let recall = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 0.0 };
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Sample Pearson correlation coefficient.
pub fn pearson_r<T: Real>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::invalid("correlation requires at least 2 points"));
    }
    let n = T::from_usize(xs.len()).expect("length fits scalar");
    let mean_x = xs.iter().copied().sum::<T>() / n;
    let mean_y = ys.iter().copied().sum::<T>() / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    let mut syy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(Error::DegenerateInput(
            "correlation undefined for a constant sequence".to_string(),
        ));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.min(T::one()).max(-T::one()))
}

/// Mean squared error.
pub fn mse<T: Real>(preds: &[T], targets: &[T]) -> Result<T> {
    if preds.len() != targets.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            preds.len(),
            targets.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::invalid("mse of empty sequences"));
    }
    let n = T::from_usize(preds.len()).expect("length fits scalar");
    let sum = preds
        .iter()
        .zip(targets)
        .map(|(&p, &t)| (p - t) * (p - t))
        .fold(T::zero(), |acc, d| acc + d);
    Ok(sum / n)
}

/// Summary of position-paired score changes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedDiff<T> {
    /// Mean of `after - before`.
    pub mean_diff: T,
    /// Sample standard deviation of the differences (0 for a single pair).
    pub sd: T,
    /// Fraction of pairs where the score strictly decreased.
    pub frac_decreased: T,
}

pub fn paired_mean_diff<T: Real>(before: &[T], after: &[T]) -> Result<PairedDiff<T>> {
    if before.len() != after.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            before.len(),
            after.len()
        )));
    }
    if before.is_empty() {
        return Err(Error::invalid("paired difference of empty sequences"));
    }
    let n = T::from_usize(before.len()).expect("length fits scalar");
    let diffs: Vec<T> = before.iter().zip(after).map(|(&b, &a)| a - b).collect();
    let mean_diff = diffs.iter().copied().sum::<T>() / n;
    let sd = if diffs.len() < 2 {
        T::zero()
    } else {
        let ss = diffs
            .iter()
            .map(|&d| (d - mean_diff) * (d - mean_diff))
            .fold(T::zero(), |acc, d| acc + d);
        (ss / (n - T::one())).sqrt()
    };
    let decreased = diffs.iter().filter(|&&d| d < T::zero()).count();
    Ok(PairedDiff {
        mean_diff,
        sd,
        frac_decreased: T::from_usize(decreased).expect("count fits scalar") / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin<T> {
    pub lo: T,
    pub hi: T,
    pub count: usize,
}

/// Equal-width histogram. Out-of-range values are tallied separately, never
/// folded into edge bins; a value on an interior boundary goes to the higher
/// bin, and the top boundary goes to the top bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram<T> {
    pub bins: Vec<HistogramBin<T>>,
    pub below_range: usize,
    pub above_range: usize,
}

impl<T: Real> Histogram<T> {
    /// CSV with header `bin_lo,bin_hi,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for bin in &self.bins {
            out.push_str(&format!("{},{},{}\n", bin.lo.as_f64(), bin.hi.as_f64(), bin.count));
        }
        out
    }

    pub fn total_count(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum::<usize>() + self.below_range + self.above_range
    }
}

pub fn histogram<T: Real>(values: &[T], bin_count: usize, range: (T, T)) -> Result<Histogram<T>> {
    let (lo, hi) = range;
    if bin_count == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid("histogram range must be finite with lo < hi"));
    }
    let n = T::from_usize(bin_count).expect("bin count fits scalar");
    let width = (hi - lo) / n;
    let mut bins: Vec<HistogramBin<T>> = (0..bin_count)
        .map(|i| {
            let i_t = T::from_usize(i).expect("bin index fits scalar");
            HistogramBin {
                lo: lo + i_t * width,
                hi: if i + 1 == bin_count { hi } else { lo + (i_t + T::one()) * width },
                count: 0,
            }
        })
        .collect();
    let mut below = 0usize;
    let mut above = 0usize;
    for &v in values {
        if v < lo {
            below += 1;
        } else if v > hi {
            above += 1;
        } else {
            let idx = ((v - lo) / width).floor().to_usize().unwrap_or(0).min(bin_count - 1);
            bins[idx].count += 1;
        }
    }
    Ok(Histogram {
        bins,
        below_range: below,
        above_range: above,
    })
}
