//! Tokenization and sparse n-gram feature extraction.
//!
//! Paragraphs are tokenized on Unicode letter/digit runs and mapped to
//! sparse vectors over a vocabulary built from the training split. Term
//! indices are assigned in lexicographic order so vocabularies are
//! reproducible across runs and platforms.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weighting scheme applied when vectorizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// Raw term counts.
    Counts,
    /// tf * (ln((1+N)/(1+df)) + 1), L2-normalized per document.
    #[default]
    TfIdf,
}

impl std::fmt::Display for Weighting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Weighting::Counts => write!(f, "counts"),
            Weighting::TfIdf => write!(f, "tf-idf"),
        }
    }
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "counts" => Ok(Weighting::Counts),
            "tf-idf" | "tfidf" => Ok(Weighting::TfIdf),
            other => Err(Error::Usage {
                reason: format!("unknown weighting {other:?}, expected counts or tf-idf"),
            }),
        }
    }
}

/// Featurization settings. N-gram bounds are inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub lowercase: bool,
    pub min_doc_freq: usize,
    pub weighting: Weighting,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            ngram_min: 1,
            ngram_max: 1,
            lowercase: true,
            min_doc_freq: 1,
            weighting: Weighting::TfIdf,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ngram_min < 1 || self.ngram_min > self.ngram_max || self.ngram_max > 3 {
            return Err(Error::Config {
                reason: format!(
                    "n-gram range ({}, {}) must satisfy 1 <= min <= max <= 3",
                    self.ngram_min, self.ngram_max
                ),
            });
        }
        if self.min_doc_freq < 1 {
            return Err(Error::Config {
                reason: "min_doc_freq must be >= 1".into(),
            });
        }
        Ok(())
    }
}

/// Split text into maximal runs of Unicode letters/digits. Punctuation is
/// dropped; umlauts and ß survive case folding.
pub fn tokenize(text: &str, config: &FeatureConfig) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            if config.lowercase {
                current.extend(ch.to_lowercase());
            } else {
                current.push(ch);
            }
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Token count under the shared tokenizer; also used by corpus statistics
/// so there is exactly one token definition.
pub fn count_tokens(text: &str) -> usize {
    let mut count = 0;
    let mut in_token = false;
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            if !in_token {
                count += 1;
                in_token = true;
            }
        } else {
            in_token = false;
        }
    }
    count
}

/// All n-grams with n in [ngram_min, ngram_max], tokens joined by a space.
pub fn ngrams(tokens: &[String], config: &FeatureConfig) -> Vec<String> {
    let mut terms = Vec::new();
    for n in config.ngram_min..=config.ngram_max {
        if n == 0 || n > tokens.len() {
            continue;
        }
        for window in tokens.windows(n) {
            terms.push(window.join(" "));
        }
    }
    terms
}

/// Serialized form: (term, index, df) triples plus the training document count.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct VocabularyData {
    doc_count: usize,
    terms: Vec<(String, usize, usize)>,
}

/// Frozen term index built from the training split.
///
/// Indices are dense 0..V-1 in lexicographic (byte) order of terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "VocabularyData", into = "VocabularyData")]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    doc_count: usize,
    lookup: HashMap<String, usize>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
            && self.doc_freq == other.doc_freq
            && self.doc_count == other.doc_count
    }
}

impl From<Vocabulary> for VocabularyData {
    fn from(v: Vocabulary) -> Self {
        VocabularyData {
            doc_count: v.doc_count,
            terms: v
                .terms
                .into_iter()
                .zip(v.doc_freq)
                .enumerate()
                .map(|(i, (term, df))| (term, i, df))
                .collect(),
        }
    }
}

impl TryFrom<VocabularyData> for Vocabulary {
    type Error = Error;

    fn try_from(data: VocabularyData) -> Result<Self> {
        let mut terms = Vec::with_capacity(data.terms.len());
        let mut doc_freq = Vec::with_capacity(data.terms.len());
        for (i, (term, index, df)) in data.terms.into_iter().enumerate() {
            if index != i {
                return Err(Error::Artifact {
                    reason: format!("vocabulary index {index} out of order at position {i}"),
                });
            }
            if let Some(prev) = terms.last() {
                if *prev >= term {
                    return Err(Error::Artifact {
                        reason: format!("vocabulary terms not sorted at index {i}"),
                    });
                }
            }
            terms.push(term);
            doc_freq.push(df);
        }
        let lookup = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Vocabulary {
            terms,
            doc_freq,
            doc_count: data.doc_count,
            lookup,
        })
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of training documents the vocabulary was built from.
    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.lookup.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn doc_freq(&self, index: usize) -> Option<usize> {
        self.doc_freq.get(index).copied()
    }

    /// Iterate (term, index, df) in index order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, usize, usize)> {
        self.terms
            .iter()
            .zip(self.doc_freq.iter())
            .enumerate()
            .map(|(i, (t, df))| (t.as_str(), i, *df))
    }

    /// Smoothed inverse document frequency: ln((1+N)/(1+df)) + 1.
    pub fn idf(&self, index: usize) -> f64 {
        let df = self.doc_freq[index] as f64;
        let n = self.doc_count as f64;
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    }
}

/// Build a vocabulary from training documents. Terms below `min_doc_freq`
/// are pruned; indices are assigned in lexicographic order.
pub fn build_vocabulary<'a, I>(documents: I, config: &FeatureConfig) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a str>,
{
    config.validate()?;
    let mut df_map: BTreeMap<String, usize> = BTreeMap::new();
    let mut doc_count = 0usize;
    for doc in documents {
        doc_count += 1;
        let tokens = tokenize(doc, config);
        let unique: BTreeSet<String> = ngrams(&tokens, config).into_iter().collect();
        for term in unique {
            *df_map.entry(term).or_insert(0) += 1;
        }
    }
    if doc_count == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut terms = Vec::new();
    let mut doc_freq = Vec::new();
    for (term, df) in df_map {
        if df >= config.min_doc_freq {
            terms.push(term);
            doc_freq.push(df);
        }
    }
    let lookup = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(Vocabulary {
        terms,
        doc_freq,
        doc_count,
        lookup,
    })
}

/// Sparse feature vector: (index, weight) pairs with strictly increasing
/// indices and no explicit zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct FeatureVector {
    entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    /// Build from entries; callers must pass strictly increasing indices.
    pub fn from_entries(entries: Vec<(usize, f64)>) -> Result<Self> {
        for pair in entries.windows(2) {
            if pair[0].0 >= pair[1].0 {
                return Err(Error::Config {
                    reason: "feature indices must be strictly increasing".into(),
                });
            }
        }
        if entries.iter().any(|(_, w)| !w.is_finite() || *w == 0.0) {
            return Err(Error::Config {
                reason: "feature weights must be finite and non-zero".into(),
            });
        }
        Ok(FeatureVector { entries })
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|(_, w)| w * w)
            .sum::<f64>()
            .sqrt()
    }

    /// Largest feature index present, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }
}

/// Map a paragraph's text to a sparse vector against a frozen vocabulary.
/// Out-of-vocabulary terms are ignored.
pub fn vectorize(text: &str, vocab: &Vocabulary, config: &FeatureConfig) -> FeatureVector {
    let tokens = tokenize(text, config);
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for term in ngrams(&tokens, config) {
        if let Some(index) = vocab.index_of(&term) {
            *counts.entry(index).or_insert(0.0) += 1.0;
        }
    }
    let mut entries: Vec<(usize, f64)> = match config.weighting {
        Weighting::Counts => counts.into_iter().collect(),
        Weighting::TfIdf => counts
            .into_iter()
            .map(|(i, tf)| (i, tf * vocab.idf(i)))
            .collect(),
    };
    if config.weighting == Weighting::TfIdf && !entries.is_empty() {
        let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in entries.iter_mut() {
                *w /= norm;
            }
        }
    }
    FeatureVector { entries }
}
