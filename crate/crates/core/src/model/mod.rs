//! Multi-class classifier backends producing full probability
//! distributions over parties.
//!
//! Two from-scratch backends are built in: softmax regression trained by
//! mini-batch gradient descent, and a multinomial naive-Bayes baseline.
//! The model artifact format reserves a third backend tag (`transformer`)
//! for an external adapter; loading it is rejected until one exists.

mod artifact;
mod naive_bayes;
mod softmax;

pub use artifact::{load_model, save_model, ModelArtifact, ARTIFACT_MAGIC, ARTIFACT_VERSION};
pub use naive_bayes::{train_naive_bayes, NaiveBayesModel};
pub use softmax::{
    loss_and_gradient, train_one_vs_rest, train_softmax, Gradients, SoftmaxModel,
};

use serde::{Deserialize, Serialize};

use crate::corpus::{LabelSet, PartyLabel};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Hyperparameters for gradient-descent training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2_lambda: f64,
    pub seed: u64,
    /// Epochs without validation improvement before stopping; 0 disables
    /// early stopping (and no validation split is carved out).
    pub early_stop_patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 100,
            batch_size: 32,
            l2_lambda: 1e-4,
            seed: 42,
            early_stop_patience: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = |reason: &str| {
            Err(Error::Config {
                reason: reason.into(),
            })
        };
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive and finite");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return bad("l2_lambda must be non-negative and finite");
        }
        Ok(())
    }
}

/// A full probability vector over the label set plus its argmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedDistribution {
    pub probabilities: Vec<f64>,
    pub argmax_label: PartyLabel,
    pub max_prob: f64,
}

impl PredictedDistribution {
    /// Ties at the argmax break toward the lowest label id.
    pub(crate) fn from_probabilities(probabilities: Vec<f64>, labels: &LabelSet) -> Self {
        debug_assert_eq!(probabilities.len(), labels.len());
        let mut argmax = 0usize;
        for (i, &p) in probabilities.iter().enumerate() {
            if p > probabilities[argmax] {
                argmax = i;
            }
        }
        let max_prob = probabilities[argmax];
        PredictedDistribution {
            probabilities,
            argmax_label: labels.get(argmax).expect("argmax within label set").clone(),
            max_prob,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.probabilities.len()
    }
}

/// Numerically stable softmax with max-subtraction.
///
/// The normalizer sums the exponentials in ascending value order, which
/// makes the result invariant under permutations of the class axis; the
/// label-relabeling equivariance of training depends on this.
pub(crate) fn stable_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let norm = permutation_invariant_sum(&exps);
    exps.into_iter().map(|e| e / norm).collect()
}

pub(crate) fn permutation_invariant_sum(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite addends"));
    sorted.iter().sum()
}

/// A trained classifier of either built-in backend.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "kebab-case")]
pub enum ClassifierModel {
    Softmax(SoftmaxModel),
    NaiveBayes(NaiveBayesModel),
}

impl ClassifierModel {
    pub fn labels(&self) -> &LabelSet {
        match self {
            ClassifierModel::Softmax(m) => m.labels(),
            ClassifierModel::NaiveBayes(m) => m.labels(),
        }
    }

    pub fn num_features(&self) -> usize {
        match self {
            ClassifierModel::Softmax(m) => m.num_features(),
            ClassifierModel::NaiveBayes(m) => m.num_features(),
        }
    }

    pub fn backend_tag(&self) -> &'static str {
        match self {
            ClassifierModel::Softmax(_) => "softmax",
            ClassifierModel::NaiveBayes(_) => "naive-bayes",
        }
    }

    /// Predict the full distribution for one feature vector.
    pub fn predict_distribution(&self, vector: &FeatureVector) -> Result<PredictedDistribution> {
        match self {
            ClassifierModel::Softmax(m) => m.predict_distribution(vector),
            ClassifierModel::NaiveBayes(m) => m.predict_distribution(vector),
        }
    }
}

/// Check that every class in `labels` occurs at least once and that at
/// least two classes exist; shared precondition of both trainers.
pub(crate) fn check_class_coverage(
    labels: &LabelSet,
    examples: &[(FeatureVector, usize)],
) -> Result<()> {
    if labels.len() < 2 {
        return Err(Error::SingleClass);
    }
    if examples.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut seen = vec![false; labels.len()];
    for (_, y) in examples {
        if *y >= labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: *y + 1,
            });
        }
        seen[*y] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::EmptyClass {
            name: labels.get(missing).expect("id in range").name.clone(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_of_zeros_is_uniform() {
        let probs = stable_softmax(&[0.0, 0.0, 0.0]);
        for p in &probs {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let a = stable_softmax(&[1.0, 2.0, 3.0]);
        let b = stable_softmax(&[101.0, 102.0, 103.0]);
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_handles_large_logits() {
        let probs = stable_softmax(&[1000.0, 0.0]);
        assert!(probs.iter().all(|p| p.is_finite()));
        assert!((probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_is_permutation_equivariant_bitwise() {
        let logits = [0.3, -1.7, 2.2, 0.9];
        let probs = stable_softmax(&logits);
        let permuted_logits = [2.2, 0.9, 0.3, -1.7];
        let permuted = stable_softmax(&permuted_logits);
        assert_eq!(probs[2].to_bits(), permuted[0].to_bits());
        assert_eq!(probs[3].to_bits(), permuted[1].to_bits());
        assert_eq!(probs[0].to_bits(), permuted[2].to_bits());
        assert_eq!(probs[1].to_bits(), permuted[3].to_bits());
    }

    #[test]
    fn argmax_tie_breaks_to_lowest_id() {
        let labels = LabelSet::new(["A", "B", "C"]).unwrap();
        let dist =
            PredictedDistribution::from_probabilities(vec![1.0 / 3.0; 3], &labels);
        assert_eq!(dist.argmax_label.id, 0);
        assert_eq!(dist.max_prob, 1.0 / 3.0);
    }

    #[test]
    fn coverage_rejects_single_class() {
        let labels = LabelSet::new(["A"]).unwrap();
        let v = FeatureVector::default();
        assert!(matches!(
            check_class_coverage(&labels, &[(v, 0)]),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn coverage_rejects_missing_class() {
        let labels = LabelSet::new(["A", "B"]).unwrap();
        let v = FeatureVector::default();
        let err = check_class_coverage(&labels, &[(v, 0)]).unwrap_err();
        assert!(matches!(err, Error::EmptyClass { name } if name == "B"));
    }
}
