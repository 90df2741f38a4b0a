//! Multinomial naive Bayes with additive smoothing; the closed-form
//! baseline backend.

use serde::{Deserialize, Serialize};

use crate::corpus::LabelSet;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

use super::{check_class_coverage, stable_softmax, PredictedDistribution};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    labels: LabelSet,
    num_features: usize,
    alpha: f64,
    /// ln of class prior, from class frequencies.
    log_priors: Vec<f64>,
    /// K x V row-major: ln p(term | class) with additive smoothing.
    log_likelihoods: Vec<f64>,
}

impl NaiveBayesModel {
    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn log_prior(&self, class: usize) -> f64 {
        self.log_priors[class]
    }

    pub fn log_likelihood(&self, class: usize, feature: usize) -> f64 {
        self.log_likelihoods[class * self.num_features + feature]
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let k = self.labels.len();
        if k < 2 {
            return Err(Error::SingleClass);
        }
        if self.log_priors.len() != k || self.log_likelihoods.len() != k * self.num_features {
            return Err(Error::Artifact {
                reason: "naive-Bayes parameter dimensions are inconsistent".into(),
            });
        }
        if self
            .log_priors
            .iter()
            .chain(self.log_likelihoods.iter())
            .any(|w| !w.is_finite())
        {
            return Err(Error::Artifact {
                reason: "naive-Bayes parameters must be finite".into(),
            });
        }
        Ok(())
    }

    /// Normalized exponentiated log-posteriors over the label set.
    pub fn predict_distribution(&self, vector: &FeatureVector) -> Result<PredictedDistribution> {
        if let Some(max) = vector.max_index() {
            if max >= self.num_features {
                return Err(Error::DimensionMismatch {
                    expected: self.num_features,
                    got: max + 1,
                });
            }
        }
        let scores: Vec<f64> = (0..self.num_classes())
            .map(|class| {
                let row = class * self.num_features;
                let mut score = self.log_priors[class];
                for &(index, weight) in vector.entries() {
                    score += weight * self.log_likelihoods[row + index];
                }
                score
            })
            .collect();
        Ok(PredictedDistribution::from_probabilities(
            stable_softmax(&scores),
            &self.labels,
        ))
    }
}

/// Closed-form fit: class priors from frequencies, per-class term
/// likelihoods (count + alpha) / (total + alpha * V).
pub fn train_naive_bayes(
    labels: &LabelSet,
    examples: &[(FeatureVector, usize)],
    num_features: usize,
    alpha: f64,
) -> Result<NaiveBayesModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config {
            reason: "smoothing alpha must be positive and finite".into(),
        });
    }
    check_class_coverage(labels, examples)?;
    let k = labels.len();
    let mut class_counts = vec![0usize; k];
    let mut term_counts = vec![0.0f64; k * num_features];
    for (vector, y) in examples {
        if let Some(max) = vector.max_index() {
            if max >= num_features {
                return Err(Error::DimensionMismatch {
                    expected: num_features,
                    got: max + 1,
                });
            }
        }
        class_counts[*y] += 1;
        let row = y * num_features;
        for &(index, weight) in vector.entries() {
            term_counts[row + index] += weight;
        }
    }

    let total = examples.len() as f64;
    let log_priors = class_counts
        .iter()
        .map(|&c| (c as f64 / total).ln())
        .collect();
    let mut log_likelihoods = vec![0.0f64; k * num_features];
    for class in 0..k {
        let row = class * num_features;
        let class_total: f64 = term_counts[row..row + num_features].iter().sum();
        let denom = class_total + alpha * num_features as f64;
        for feature in 0..num_features {
            log_likelihoods[row + feature] =
                ((term_counts[row + feature] + alpha) / denom).ln();
        }
    }

    let model = NaiveBayesModel {
        labels: labels.clone(),
        num_features,
        alpha,
        log_priors,
        log_likelihoods,
    };
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{build_vocabulary, vectorize, FeatureConfig, Weighting};

    fn counts_config() -> FeatureConfig {
        FeatureConfig {
            weighting: Weighting::Counts,
            ..FeatureConfig::default()
        }
    }

    /// Two classes over the two-term vocabulary {x, y}:
    /// class 0 holds "x x y" and "x y", class 1 holds "y y x" and "y".
    fn toy() -> (LabelSet, Vec<(FeatureVector, usize)>, crate::features::Vocabulary) {
        let config = counts_config();
        let docs = [("x x y", 0), ("x y", 0), ("y y x", 1), ("y", 1)];
        let vocab = build_vocabulary(docs.iter().map(|(t, _)| *t), &config).unwrap();
        let examples = docs
            .iter()
            .map(|(t, y)| (vectorize(t, &vocab, &config), *y))
            .collect();
        let labels = LabelSet::new(["nord", "sued"]).unwrap();
        (labels, examples, vocab)
    }

    // Expected posteriors recomputed by hand:
    // p(x|c0)=4/7, p(y|c0)=3/7, p(x|c1)=1/3, p(y|c1)=2/3, priors 1/2 each;
    // doc "x y" gives posteriors 108/206 and 98/206.
    #[test]
    fn posteriors_match_hand_computed_table() {
        let (labels, examples, vocab) = toy();
        let model = train_naive_bayes(&labels, &examples, vocab.len(), 1.0).unwrap();
        let doc = vectorize("x y", &vocab, &counts_config());
        let dist = model.predict_distribution(&doc).unwrap();
        assert!((dist.probabilities[0] - 108.0 / 206.0).abs() < 1e-12);
        assert!((dist.probabilities[1] - 98.0 / 206.0).abs() < 1e-12);
        assert_eq!(dist.argmax_label.name, "nord");
    }

    #[test]
    fn likelihoods_sum_to_one_per_class() {
        let (labels, examples, vocab) = toy();
        let model = train_naive_bayes(&labels, &examples, vocab.len(), 1.0).unwrap();
        for class in 0..2 {
            let sum: f64 = (0..vocab.len())
                .map(|f| model.log_likelihood(class, f).exp())
                .sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        let prior_sum: f64 = (0..2).map(|c| model.log_prior(c).exp()).sum();
        assert!((prior_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mirrored_counts_give_mirrored_posteriors() {
        let config = counts_config();
        let docs = [("x x y", 0), ("y y x", 1)];
        let vocab = build_vocabulary(docs.iter().map(|(t, _)| *t), &config).unwrap();
        let examples: Vec<(FeatureVector, usize)> = docs
            .iter()
            .map(|(t, y)| (vectorize(t, &vocab, &config), *y))
            .collect();
        let labels = LabelSet::new(["a", "b"]).unwrap();
        let model = train_naive_bayes(&labels, &examples, vocab.len(), 1.0).unwrap();
        let px = model.predict_distribution(&vectorize("x", &vocab, &config)).unwrap();
        let py = model.predict_distribution(&vectorize("y", &vocab, &config)).unwrap();
        assert!((px.probabilities[0] - py.probabilities[1]).abs() < 1e-12);
        assert!((px.probabilities[1] - py.probabilities[0]).abs() < 1e-12);
    }

    // With alpha near infinity the likelihoods flatten to 1/V and the
    // posterior collapses to the class priors.
    #[test]
    fn huge_alpha_approaches_class_priors() {
        let config = counts_config();
        let docs = [("x x y", 0), ("x y", 0), ("y y x", 1)];
        let vocab = build_vocabulary(docs.iter().map(|(t, _)| *t), &config).unwrap();
        let examples: Vec<(FeatureVector, usize)> = docs
            .iter()
            .map(|(t, y)| (vectorize(t, &vocab, &config), *y))
            .collect();
        let labels = LabelSet::new(["a", "b"]).unwrap();
        let model = train_naive_bayes(&labels, &examples, vocab.len(), 1e6).unwrap();
        let dist = model.predict_distribution(&vectorize("x x", &vocab, &config)).unwrap();
        assert!((dist.probabilities[0] - 2.0 / 3.0).abs() < 1e-4);
        assert!((dist.probabilities[1] - 1.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn rejects_non_positive_alpha() {
        let (labels, examples, vocab) = toy();
        assert!(train_naive_bayes(&labels, &examples, vocab.len(), 0.0).is_err());
        assert!(train_naive_bayes(&labels, &examples, vocab.len(), -1.0).is_err());
    }

    #[test]
    fn distribution_sums_to_one() {
        let (labels, examples, vocab) = toy();
        let model = train_naive_bayes(&labels, &examples, vocab.len(), 0.5).unwrap();
        for (v, _) in &examples {
            let dist = model.predict_distribution(v).unwrap();
            let sum: f64 = dist.probabilities.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(dist.probabilities.iter().all(|p| *p >= 0.0));
        }
    }
}
