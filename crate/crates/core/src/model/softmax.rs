//! Softmax regression trained by mini-batch gradient descent.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::LabelSet;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

use super::{
    check_class_coverage, permutation_invariant_sum, PredictedDistribution, TrainConfig,
};

/// Linear softmax classifier: logits z = Wx + b, p = softmax(z).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SoftmaxModel {
    labels: LabelSet,
    num_features: usize,
    /// K x V row-major.
    weights: Vec<f64>,
    bias: Vec<f64>,
    /// Mean training loss before epoch 1 and after each completed epoch.
    loss_trajectory: Vec<f64>,
}

impl SoftmaxModel {
    /// Zero-initialized model; its loss on any data is exactly ln K.
    pub fn zeros(labels: LabelSet, num_features: usize) -> Self {
        let k = labels.len();
        SoftmaxModel {
            labels,
            num_features,
            weights: vec![0.0; k * num_features],
            bias: vec![0.0; k],
            loss_trajectory: Vec::new(),
        }
    }

    pub fn from_parameters(
        labels: LabelSet,
        num_features: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        let k = labels.len();
        if weights.len() != k * num_features || bias.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k * num_features,
                got: weights.len(),
            });
        }
        let model = SoftmaxModel {
            labels,
            num_features,
            weights,
            bias,
            loss_trajectory: Vec::new(),
        };
        model.validate()?;
        Ok(model)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let k = self.labels.len();
        if k < 2 {
            return Err(Error::SingleClass);
        }
        if self.weights.len() != k * self.num_features || self.bias.len() != k {
            return Err(Error::Artifact {
                reason: "softmax parameter dimensions are inconsistent".into(),
            });
        }
        if self.weights.iter().chain(self.bias.iter()).any(|w| !w.is_finite()) {
            return Err(Error::Artifact {
                reason: "softmax parameters must be finite".into(),
            });
        }
        Ok(())
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weight(&self, class: usize, feature: usize) -> f64 {
        self.weights[class * self.num_features + feature]
    }

    pub fn weight_row(&self, class: usize) -> &[f64] {
        &self.weights[class * self.num_features..(class + 1) * self.num_features]
    }

    pub fn loss_trajectory(&self) -> &[f64] {
        &self.loss_trajectory
    }

    fn check_vector(&self, vector: &FeatureVector) -> Result<()> {
        if let Some(max) = vector.max_index() {
            if max >= self.num_features {
                return Err(Error::DimensionMismatch {
                    expected: self.num_features,
                    got: max + 1,
                });
            }
        }
        Ok(())
    }

    pub fn logits(&self, vector: &FeatureVector) -> Result<Vec<f64>> {
        self.check_vector(vector)?;
        let mut logits = self.bias.clone();
        for (class, logit) in logits.iter_mut().enumerate() {
            let row = class * self.num_features;
            for &(index, weight) in vector.entries() {
                *logit += self.weights[row + index] * weight;
            }
        }
        Ok(logits)
    }

    pub fn predict_distribution(&self, vector: &FeatureVector) -> Result<PredictedDistribution> {
        let logits = self.logits(vector)?;
        let (probs, _) = softmax_with_ce(&logits, 0);
        Ok(PredictedDistribution::from_probabilities(probs, &self.labels))
    }
}

/// Softmax probabilities plus the cross-entropy for `true_class`, computed
/// via log-sum-exp so extreme logits cannot produce infinities.
fn softmax_with_ce(logits: &[f64], true_class: usize) -> (Vec<f64>, f64) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let norm = permutation_invariant_sum(&exps);
    let loss = norm.ln() - (logits[true_class] - max);
    let probs = exps.into_iter().map(|e| e / norm).collect();
    (probs, loss)
}

/// Gradients of the objective with respect to W (row-major) and b.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Mean cross-entropy over the batch plus (lambda/2)*||W||^2, with exact
/// analytic gradients.
pub fn loss_and_gradient(
    model: &SoftmaxModel,
    batch: &[(FeatureVector, usize)],
    l2_lambda: f64,
) -> Result<(f64, Gradients)> {
    let refs: Vec<&(FeatureVector, usize)> = batch.iter().collect();
    loss_and_gradient_refs(model, &refs, l2_lambda)
}

fn loss_and_gradient_refs(
    model: &SoftmaxModel,
    batch: &[&(FeatureVector, usize)],
    l2_lambda: f64,
) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let k = model.num_classes();
    let v = model.num_features();
    let mut grad_w = vec![0.0; k * v];
    let mut grad_b = vec![0.0; k];
    let mut ce_sum = 0.0;
    let inv_batch = 1.0 / batch.len() as f64;

    for (vector, true_class) in batch.iter() {
        if *true_class >= k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: *true_class + 1,
            });
        }
        let logits = model.logits(vector)?;
        let (probs, ce) = softmax_with_ce(&logits, *true_class);
        ce_sum += ce;
        for class in 0..k {
            let dz = (probs[class] - if class == *true_class { 1.0 } else { 0.0 }) * inv_batch;
            grad_b[class] += dz;
            let row = class * v;
            for &(index, weight) in vector.entries() {
                grad_w[row + index] += dz * weight;
            }
        }
    }

    let mut loss = ce_sum * inv_batch;
    if l2_lambda != 0.0 {
        let squared: f64 = model.weights.iter().map(|w| w * w).sum();
        loss += 0.5 * l2_lambda * squared;
        for (g, w) in grad_w.iter_mut().zip(model.weights.iter()) {
            *g += l2_lambda * w;
        }
    }
    Ok((
        loss,
        Gradients {
            weights: grad_w,
            bias: grad_b,
        },
    ))
}

fn mean_loss(
    model: &SoftmaxModel,
    examples: &[(FeatureVector, usize)],
    indices: &[usize],
    l2_lambda: f64,
) -> Result<f64> {
    let mut ce_sum = 0.0;
    for &i in indices {
        let (vector, true_class) = &examples[i];
        let logits = model.logits(vector)?;
        let (_, ce) = softmax_with_ce(&logits, *true_class);
        ce_sum += ce;
    }
    let mut loss = ce_sum / indices.len() as f64;
    if l2_lambda != 0.0 {
        let squared: f64 = model.weights.iter().map(|w| w * w).sum();
        loss += 0.5 * l2_lambda * squared;
    }
    Ok(loss)
}

/// Stratified validation carve-out for early stopping: roughly 10% per
/// class, never emptying a class on the training side.
fn validation_split(
    labels: &LabelSet,
    examples: &[(FeatureVector, usize)],
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in 0..labels.len() {
        let mut indices: Vec<usize> = examples
            .iter()
            .enumerate()
            .filter(|(_, (_, y))| *y == class)
            .map(|(i, _)| i)
            .collect();
        indices.shuffle(rng);
        let n = indices.len();
        let n_val = if n < 2 {
            0
        } else {
            ((0.1 * n as f64).round() as usize).clamp(1, n - 1)
        };
        val.extend_from_slice(&indices[..n_val]);
        train.extend_from_slice(&indices[n_val..]);
    }
    (train, val)
}

/// Train by mini-batch gradient descent from zero initialization.
///
/// Deterministic for a fixed seed: shuffling uses a seeded ChaCha stream
/// and batch accumulation runs in a fixed order. With
/// `early_stop_patience > 0` a stratified validation slice is held out and
/// the best-validation parameters are returned.
pub fn train_softmax(
    labels: &LabelSet,
    examples: &[(FeatureVector, usize)],
    num_features: usize,
    config: &TrainConfig,
) -> Result<SoftmaxModel> {
    config.validate()?;
    check_class_coverage(labels, examples)?;
    for (vector, _) in examples {
        if let Some(max) = vector.max_index() {
            if max >= num_features {
                return Err(Error::DimensionMismatch {
                    expected: num_features,
                    got: max + 1,
                });
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (mut train_indices, val_indices) = if config.early_stop_patience > 0 {
        validation_split(labels, examples, &mut rng)
    } else {
        ((0..examples.len()).collect(), Vec::new())
    };

    let mut model = SoftmaxModel::zeros(labels.clone(), num_features);
    model
        .loss_trajectory
        .push(mean_loss(&model, examples, &train_indices, config.l2_lambda)?);

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut epochs_since_best = 0usize;

    for epoch in 1..=config.epochs {
        train_indices.shuffle(&mut rng);
        for batch_indices in train_indices.chunks(config.batch_size) {
            let batch: Vec<&(FeatureVector, usize)> =
                batch_indices.iter().map(|&i| &examples[i]).collect();
            let (loss, grads) = loss_and_gradient_refs(&model, &batch, config.l2_lambda)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            for (w, g) in model.weights.iter_mut().zip(grads.weights.iter()) {
                *w -= config.learning_rate * g;
            }
            for (b, g) in model.bias.iter_mut().zip(grads.bias.iter()) {
                *b -= config.learning_rate * g;
            }
        }

        let epoch_loss = mean_loss(&model, examples, &train_indices, config.l2_lambda)?;
        if !epoch_loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        model.loss_trajectory.push(epoch_loss);

        if !val_indices.is_empty() {
            let val_loss = mean_loss(&model, examples, &val_indices, config.l2_lambda)?;
            let improved = best.as_ref().is_none_or(|(b, _, _)| val_loss < *b);
            if improved {
                best = Some((val_loss, model.weights.clone(), model.bias.clone()));
                epochs_since_best = 0;
            } else {
                epochs_since_best += 1;
                if epochs_since_best >= config.early_stop_patience {
                    break;
                }
            }
        }
    }

    if let Some((_, weights, bias)) = best {
        model.weights = weights;
        model.bias = bias;
    }
    Ok(model)
}

/// Relabel the corpus as {focus, rest} and train the two-class backend.
pub fn train_one_vs_rest(
    labels: &LabelSet,
    examples: &[(FeatureVector, usize)],
    num_features: usize,
    focus_id: usize,
    config: &TrainConfig,
) -> Result<SoftmaxModel> {
    let focus = labels.get(focus_id).ok_or(Error::DimensionMismatch {
        expected: labels.len(),
        got: focus_id + 1,
    })?;
    if !examples.iter().any(|(_, y)| *y == focus_id) {
        return Err(Error::FocusAbsent {
            name: focus.name.clone(),
        });
    }
    if !examples.iter().any(|(_, y)| *y != focus_id) {
        return Err(Error::EmptyClass {
            name: "rest".into(),
        });
    }
    let rest_name = if focus.name == "rest" { "other" } else { "rest" };
    let binary_labels = LabelSet::new([focus.name.clone(), rest_name.to_string()])?;
    let relabeled: Vec<(FeatureVector, usize)> = examples
        .iter()
        .map(|(v, y)| (v.clone(), usize::from(*y != focus_id)))
        .collect();
    train_softmax(&binary_labels, &relabeled, num_features, config)
}
