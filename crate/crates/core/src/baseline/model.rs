//! Linear scoring model: a classification head over buckets (cross-entropy,
//! weighted-average decoding) or a regression head (MSE), plus an optional
//! auxiliary prompt-category head supervised jointly.

use serde::{Deserialize, Serialize};

use crate::baseline::features::{featurize, FeatureSpec, SparseVector};
use crate::error::{Error, Result};
use crate::labeler::{prompt_category_index, LabeledExample, PROMPT_CATEGORIES};
use crate::simmetrics::{decode_weighted, normalize_score};
use crate::{Buckets, Scalar};

/// Output head of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeadKind {
    /// Softmax over `n` buckets trained with cross-entropy.
    Classification { n: usize },
    /// Direct scaled-score output trained with MSE.
    Regression,
}

/// Auxiliary linear head over the nine prompt categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxHead {
    pub n_classes: usize,
    pub weights: Vec<Scalar>,
    pub bias: Vec<Scalar>,
}

/// All parameters of the scorer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub head: HeadKind,
    /// Row-major `n_outputs x dim`.
    pub weights: Vec<Scalar>,
    pub bias: Vec<Scalar>,
    pub aux: Option<AuxHead>,
    /// Weight of the auxiliary loss term in the joint objective.
    pub aux_weight: Scalar,
    pub buckets: Buckets,
    pub features: FeatureSpec,
}

impl ModelParams {
    /// All-zero initialization: the convex objective needs no symmetry
    /// breaking and the base predictions are exactly uniform.
    pub fn zeroed(
        head: HeadKind,
        buckets: Buckets,
        features: FeatureSpec,
        with_aux: bool,
        aux_weight: Scalar,
    ) -> Result<Self> {
        features.validate()?;
        buckets.validate()?;
        if let HeadKind::Classification { n } = head {
            if n != buckets.n {
                return Err(Error::invalid(format!(
                    "classification head n={n} disagrees with bucket spec n={}",
                    buckets.n
                )));
            }
        }
        if aux_weight < 0.0 {
            return Err(Error::invalid("aux_weight must be >= 0"));
        }
        let n_outputs = match head {
            HeadKind::Classification { n } => n,
            HeadKind::Regression => 1,
        };
        let aux = with_aux.then(|| AuxHead {
            n_classes: PROMPT_CATEGORIES.len(),
            weights: vec![0.0; PROMPT_CATEGORIES.len() * features.dim],
            bias: vec![0.0; PROMPT_CATEGORIES.len()],
        });
        Ok(ModelParams {
            head,
            weights: vec![0.0; n_outputs * features.dim],
            bias: vec![0.0; n_outputs],
            aux,
            aux_weight,
            buckets,
            features,
        })
    }

    pub fn n_outputs(&self) -> usize {
        match self.head {
            HeadKind::Classification { n } => n,
            HeadKind::Regression => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        self.buckets.validate()?;
        let expected = self.n_outputs() * self.features.dim;
        if self.weights.len() != expected || self.bias.len() != self.n_outputs() {
            return Err(Error::invalid("parameter shapes do not match the head"));
        }
        if !self.weights.iter().chain(&self.bias).all(|w| w.is_finite()) {
            return Err(Error::invalid("non-finite model parameters"));
        }
        if let Some(aux) = &self.aux {
            if aux.weights.len() != aux.n_classes * self.features.dim
                || aux.bias.len() != aux.n_classes
            {
                return Err(Error::invalid("auxiliary head shapes are inconsistent"));
            }
        }
        Ok(())
    }

    fn logits_into(&self, x: &SparseVector, weights: &[Scalar], bias: &[Scalar], out: &mut [Scalar]) {
        let dim = self.features.dim;
        for (o, (&b, row)) in out
            .iter_mut()
            .zip(bias.iter().zip(weights.chunks_exact(dim)))
        {
            let mut acc = b;
            for (&i, &v) in x.indices.iter().zip(&x.values) {
                acc += row[i as usize] * v;
            }
            *o = acc;
        }
    }

    /// Bucket probabilities for a text (classification head only).
    pub fn predict_probs(&self, text: &str) -> Result<Vec<Scalar>> {
        let x = featurize(text, &self.features)?;
        self.predict_probs_features(&x)
    }

    pub fn predict_probs_features(&self, x: &SparseVector) -> Result<Vec<Scalar>> {
        let HeadKind::Classification { n } = self.head else {
            return Err(Error::WrongHead(
                "predict_probs requires a classification head".to_string(),
            ));
        };
        let mut logits = vec![0.0; n];
        self.logits_into(x, &self.weights, &self.bias, &mut logits);
        Ok(softmax(&logits))
    }

    /// Normalized score in `[0, 1]`: weighted-average decode for the
    /// classification head, clamped direct output for regression.
    pub fn predict_score(&self, text: &str) -> Result<Scalar> {
        let x = featurize(text, &self.features)?;
        self.predict_score_features(&x)
    }

    pub fn predict_score_features(&self, x: &SparseVector) -> Result<Scalar> {
        match self.head {
            HeadKind::Classification { .. } => {
                let probs = self.predict_probs_features(x)?;
                let decoded = decode_weighted(&probs, &self.buckets)?;
                Ok(normalize_score(decoded, &self.buckets))
            }
            HeadKind::Regression => {
                let mut out = [0.0];
                self.logits_into(x, &self.weights, &self.bias, &mut out);
                Ok(out[0].clamp(0.0, 1.0))
            }
        }
    }

    /// Probabilities over prompt categories from the auxiliary head.
    pub fn predict_prompt_probs_features(&self, x: &SparseVector) -> Result<Vec<Scalar>> {
        let aux = self
            .aux
            .as_ref()
            .ok_or_else(|| Error::WrongHead("model has no auxiliary prompt head".to_string()))?;
        let mut logits = vec![0.0; aux.n_classes];
        self.logits_into(x, &aux.weights, &aux.bias, &mut logits);
        Ok(softmax(&logits))
    }
}

pub(crate) fn softmax(logits: &[Scalar]) -> Vec<Scalar> {
    let max = logits.iter().cloned().fold(Scalar::NEG_INFINITY, Scalar::max);
    let exps: Vec<Scalar> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: Scalar = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// One prepared training item.
#[derive(Debug, Clone)]
pub struct TrainItem {
    pub features: SparseVector,
    pub bucket: usize,
    pub target: Scalar,
    pub prompt_class: Option<usize>,
}

impl TrainItem {
    pub fn from_example(example: &LabeledExample, spec: &FeatureSpec) -> Result<Self> {
        Ok(TrainItem {
            features: featurize(&example.text, spec)?,
            bucket: example.bucket,
            target: example.target,
            prompt_class: example
                .prompt_category
                .as_deref()
                .and_then(prompt_category_index),
        })
    }
}

/// Gradient with the same shapes as the parameters it differentiates.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGradient {
    pub weights: Vec<Scalar>,
    pub bias: Vec<Scalar>,
    pub aux_weights: Vec<Scalar>,
    pub aux_bias: Vec<Scalar>,
}

/// Joint loss and its exact analytic gradient over a batch.
///
/// Classification: mean cross-entropy over bucket labels. Regression: mean
/// squared error against scaled targets (on the raw, unclamped output).
/// When the auxiliary head exists, `aux_weight` times the mean prompt-class
/// cross-entropy (over items that carry a category) is added.
pub fn loss_and_grad(model: &ModelParams, batch: &[TrainItem]) -> Result<(Scalar, ModelGradient)> {
    if batch.is_empty() {
        return Err(Error::invalid("loss over an empty batch"));
    }
    let dim = model.features.dim;
    let n_outputs = model.n_outputs();
    let mut grad = ModelGradient {
        weights: vec![0.0; model.weights.len()],
        bias: vec![0.0; model.bias.len()],
        aux_weights: model.aux.as_ref().map_or(Vec::new(), |a| vec![0.0; a.weights.len()]),
        aux_bias: model.aux.as_ref().map_or(Vec::new(), |a| vec![0.0; a.bias.len()]),
    };
    let inv_b = 1.0 / batch.len() as Scalar;
    let mut loss = 0.0;

    for item in batch {
        match model.head {
            HeadKind::Classification { n } => {
                if item.bucket >= n {
                    return Err(Error::invalid(format!(
                        "bucket label {} out of range for n={n}",
                        item.bucket
                    )));
                }
                let probs = model.predict_probs_features(&item.features)?;
                loss -= inv_b * probs[item.bucket].max(Scalar::MIN_POSITIVE).ln();
                for c in 0..n {
                    let delta = inv_b * (probs[c] - if c == item.bucket { 1.0 } else { 0.0 });
                    grad.bias[c] += delta;
                    let row = &mut grad.weights[c * dim..(c + 1) * dim];
                    for (&i, &v) in item.features.indices.iter().zip(&item.features.values) {
                        row[i as usize] += delta * v;
                    }
                }
            }
            HeadKind::Regression => {
                if !(0.0..=1.0).contains(&item.target) {
                    return Err(Error::invalid(format!(
                        "regression target {} outside [0, 1]",
                        item.target
                    )));
                }
                let mut out = [0.0];
                model.logits_into(&item.features, &model.weights, &model.bias, &mut out);
                let err = out[0] - item.target;
                loss += inv_b * err * err;
                let delta = inv_b * 2.0 * err;
                grad.bias[0] += delta;
                for (&i, &v) in item.features.indices.iter().zip(&item.features.values) {
                    grad.weights[i as usize] += delta * v;
                }
            }
        }
    }
    debug_assert_eq!(n_outputs * dim, model.weights.len());

    if let Some(aux) = &model.aux {
        let with_class: Vec<&TrainItem> = batch.iter().filter(|i| i.prompt_class.is_some()).collect();
        if !with_class.is_empty() && model.aux_weight > 0.0 {
            let inv_m = 1.0 / with_class.len() as Scalar;
            for item in with_class {
                let class = item.prompt_class.expect("filtered");
                if class >= aux.n_classes {
                    return Err(Error::invalid(format!(
                        "prompt class {class} out of range for {} categories",
                        aux.n_classes
                    )));
                }
                let probs = model.predict_prompt_probs_features(&item.features)?;
                loss -= model.aux_weight * inv_m * probs[class].max(Scalar::MIN_POSITIVE).ln();
                for c in 0..aux.n_classes {
                    let delta = model.aux_weight
                        * inv_m
                        * (probs[c] - if c == class { 1.0 } else { 0.0 });
                    grad.aux_bias[c] += delta;
                    let row = &mut grad.aux_weights[c * dim..(c + 1) * dim];
                    for (&i, &v) in item.features.indices.iter().zip(&item.features.values) {
                        row[i as usize] += delta * v;
                    }
                }
            }
        }
    }

    Ok((loss, grad))
}

/// Convenience wrapper featurizing labeled examples on the fly.
pub fn loss_and_grad_examples(
    model: &ModelParams,
    examples: &[LabeledExample],
) -> Result<(Scalar, ModelGradient)> {
    let batch: Vec<TrainItem> = examples
        .iter()
        .map(|e| TrainItem::from_example(e, &model.features))
        .collect::<Result<_>>()?;
    loss_and_grad(model, &batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simmetrics::BucketSpec;

    fn tiny_features() -> FeatureSpec {
        FeatureSpec {
            dim: 1 << 10,
            ..FeatureSpec::default()
        }
    }

    fn buckets4() -> Buckets {
        BucketSpec::new(4, 0.03, 0.15).unwrap()
    }

    fn zero_classifier(with_aux: bool) -> ModelParams {
        ModelParams::zeroed(
            HeadKind::Classification { n: 4 },
            buckets4(),
            tiny_features(),
            with_aux,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_model_predicts_uniform_and_midpoint() {
        let model = zero_classifier(false);
        let probs = model.predict_probs("any input text at all").unwrap();
        assert_eq!(probs, vec![0.25; 4]);
        let score = model.predict_score("any input text at all").unwrap();
        assert!((score - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_regression_predicts_zero() {
        let model = ModelParams::zeroed(
            HeadKind::Regression,
            buckets4(),
            tiny_features(),
            false,
            0.0,
        )
        .unwrap();
        assert_eq!(model.predict_score("whatever text").unwrap(), 0.0);
    }

    #[test]
    fn probs_sum_to_one_and_are_shift_invariant() {
        let mut model = zero_classifier(false);
        // bias shift must not change the argmax or the distribution shape
        let x = featurize("alpha beta gamma", &model.features).unwrap();
        for b in model.bias.iter_mut() {
            *b = 3.7;
        }
        let probs = model.predict_probs_features(&x).unwrap();
        assert!((probs.iter().sum::<Scalar>() - 1.0).abs() < 1e-9);
        assert_eq!(probs, vec![0.25; 4]);
        assert!(probs.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn wrong_head_is_reported() {
        let regression = ModelParams::zeroed(
            HeadKind::Regression,
            buckets4(),
            tiny_features(),
            false,
            0.0,
        )
        .unwrap();
        assert!(matches!(
            regression.predict_probs("text"),
            Err(Error::WrongHead(_))
        ));
        let classifier = zero_classifier(false);
        let x = featurize("text here", &classifier.features).unwrap();
        assert!(matches!(
            classifier.predict_prompt_probs_features(&x),
            Err(Error::WrongHead(_))
        ));
    }

    #[test]
    fn classification_score_stays_in_decode_bounds() {
        let mut model = zero_classifier(false);
        // push weights around arbitrarily; the decode range still binds
        for (k, w) in model.weights.iter_mut().enumerate() {
            *w = ((k % 13) as Scalar - 6.0) * 0.3;
        }
        for text in ["one sample", "another bit of text", "third probe"] {
            let score = model.predict_score(text).unwrap();
            assert!((0.125..=0.875).contains(&score), "score {score} out of bounds");
        }
    }

    fn item(text: &str, bucket: usize, target: Scalar, class: Option<usize>) -> TrainItem {
        TrainItem {
            features: featurize(text, &tiny_features()).unwrap(),
            bucket,
            target,
            prompt_class: class,
        }
    }

    #[test]
    fn near_one_hot_predictions_have_near_zero_ce() {
        let mut model = zero_classifier(false);
        let x = featurize("the probe text", &model.features).unwrap();
        // drive bucket 2's logit far up via bias
        model.bias = vec![-40.0, -40.0, 0.0, -40.0];
        let (loss, _) = loss_and_grad(&model, &[item("the probe text", 2, 0.5, None)]).unwrap();
        assert!(loss <= 1e-11, "loss {loss}");
        let probs = model.predict_probs_features(&x).unwrap();
        assert!(probs[2] > 1.0 - 1e-12);
    }

    #[test]
    fn exact_regression_fit_has_zero_mse() {
        let model = ModelParams::zeroed(
            HeadKind::Regression,
            buckets4(),
            tiny_features(),
            false,
            0.0,
        )
        .unwrap();
        let batch = [item("abc def", 0, 0.0, None), item("ghi jkl", 0, 0.0, None)];
        let (loss, grad) = loss_and_grad(&model, &batch).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.weights.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn invalid_targets_rejected() {
        let classifier = zero_classifier(false);
        assert!(loss_and_grad(&classifier, &[item("t x", 9, 0.5, None)]).is_err());
        let regression = ModelParams::zeroed(
            HeadKind::Regression,
            buckets4(),
            tiny_features(),
            false,
            0.0,
        )
        .unwrap();
        assert!(loss_and_grad(&regression, &[item("t x", 0, 1.5, None)]).is_err());
        assert!(loss_and_grad(&classifier, &[]).is_err());
    }

    /// Central finite differences against the analytic gradient, exercised
    /// for both heads and the joint multi-task loss.
    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let texts = [
            "alpha beta gamma delta",
            "beta gamma epsilon",
            "zeta eta theta alpha",
            "iota kappa",
            "lambda mu nu xi omicron",
        ];
        // classification + aux joint loss
        let feature_spec = FeatureSpec {
            dim: 1 << 10,
            families: vec![FeatureFamily::WordUnigram, FeatureFamily::WordBigram],
            hash_seed: 7,
        };
        let mut model = ModelParams::zeroed(
            HeadKind::Classification { n: 4 },
            buckets4(),
            feature_spec.clone(),
            true,
            0.7,
        )
        .unwrap();
        // non-trivial starting point
        for (k, w) in model.weights.iter_mut().enumerate() {
            *w = (((k * 2654435761) % 97) as Scalar / 97.0 - 0.5) * 0.2;
        }
        if let Some(aux) = model.aux.as_mut() {
            for (k, w) in aux.weights.iter_mut().enumerate() {
                *w = (((k * 40503) % 89) as Scalar / 89.0 - 0.5) * 0.2;
            }
        }
        let batch: Vec<TrainItem> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| item_with_spec(t, i % 4, 0.0, Some(i % 9), &feature_spec))
            .collect();
        check_gradient(&model, &batch);

        // regression head
        let mut regression = ModelParams::zeroed(
            HeadKind::Regression,
            buckets4(),
            feature_spec.clone(),
            false,
            0.0,
        )
        .unwrap();
        for (k, w) in regression.weights.iter_mut().enumerate() {
            *w = (((k * 11400714819323198485) % 101) as Scalar / 101.0 - 0.5) * 0.3;
        }
        let batch: Vec<TrainItem> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| item_with_spec(t, 0, (i as Scalar) / 5.0, None, &feature_spec))
            .collect();
        check_gradient(&regression, &batch);
    }

    fn item_with_spec(
        text: &str,
        bucket: usize,
        target: Scalar,
        class: Option<usize>,
        spec: &FeatureSpec,
    ) -> TrainItem {
        TrainItem {
            features: featurize(text, spec).unwrap(),
            bucket,
            target,
            prompt_class: class,
        }
    }

    fn check_gradient(model: &ModelParams, batch: &[TrainItem]) {
        let (_, grad) = loss_and_grad(model, batch).unwrap();
        let h = 1e-5;
        let mut worst: Scalar = 0.0;
        // probe the parameters the batch actually touches, plus biases
        let mut probes: Vec<(&str, usize)> = Vec::new();
        let dim = model.features.dim;
        for item in batch {
            for &i in item.features.indices.iter().take(4) {
                for c in 0..model.n_outputs() {
                    probes.push(("w", c * dim + i as usize));
                }
                if model.aux.is_some() {
                    probes.push(("aw", i as usize));
                    probes.push(("aw", 3 * dim + i as usize));
                }
            }
        }
        for c in 0..model.n_outputs() {
            probes.push(("b", c));
        }
        if let Some(aux) = &model.aux {
            for c in 0..aux.n_classes {
                probes.push(("ab", c));
            }
        }
        probes.sort();
        probes.dedup();
        for (kind, idx) in probes {
            let mut plus = model.clone();
            let mut minus = model.clone();
            let analytic = match kind {
                "w" => {
                    plus.weights[idx] += h;
                    minus.weights[idx] -= h;
                    grad.weights[idx]
                }
                "b" => {
                    plus.bias[idx] += h;
                    minus.bias[idx] -= h;
                    grad.bias[idx]
                }
                "aw" => {
                    plus.aux.as_mut().unwrap().weights[idx] += h;
                    minus.aux.as_mut().unwrap().weights[idx] -= h;
                    grad.aux_weights[idx]
                }
                _ => {
                    plus.aux.as_mut().unwrap().bias[idx] += h;
                    minus.aux.as_mut().unwrap().bias[idx] -= h;
                    grad.aux_bias[idx]
                }
            };
            let (loss_plus, _) = loss_and_grad(&plus, batch).unwrap();
            let (loss_minus, _) = loss_and_grad(&minus, batch).unwrap();
            let numeric = (loss_plus - loss_minus) / (2.0 * h);
            let rel = (analytic - numeric).abs() / numeric.abs().max(analytic.abs()).max(1e-4);
            worst = worst.max(rel);
        }
        assert!(worst <= 1e-4, "max relative gradient error {worst}");
    }
}
