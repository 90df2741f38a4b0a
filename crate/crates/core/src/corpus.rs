//! Corpus ingestion: cleaning, paragraph segmentation, labels, statistics.
//!
//! Input is a directory of plaintext manifestos (one file per party) plus an
//! optional unlabeled target document, described by a small TOML manifest.
//! Cleaning removes PDF-conversion artefacts; segmentation splits on blank
//! lines and drops blocks shorter than a configurable token minimum.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features;

/// A party with a dense, stable ordinal id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartyLabel {
    pub id: usize,
    pub name: String,
}

/// The ordered set of parties in a corpus. Ids are dense 0..K-1 by
/// construction and names are unique and non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PartyLabel>", into = "Vec<PartyLabel>")]
pub struct LabelSet {
    labels: Vec<PartyLabel>,
}

impl From<LabelSet> for Vec<PartyLabel> {
    fn from(set: LabelSet) -> Self {
        set.labels
    }
}

impl TryFrom<Vec<PartyLabel>> for LabelSet {
    type Error = Error;

    fn try_from(labels: Vec<PartyLabel>) -> Result<Self> {
        let names: Vec<String> = labels.iter().map(|l| l.name.clone()).collect();
        let set = LabelSet::new(names)?;
        for (expected, given) in set.labels.iter().zip(labels.iter()) {
            if expected.id != given.id {
                return Err(Error::Manifest {
                    reason: format!(
                        "label ids must be dense 0..K-1 in order; got id {} for {:?}",
                        given.id, given.name
                    ),
                });
            }
        }
        Ok(set)
    }
}

impl LabelSet {
    /// Assign dense ids 0..K-1 to the given names, in order.
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels = Vec::new();
        let mut seen = BTreeSet::new();
        for (id, name) in names.into_iter().enumerate() {
            let name = name.into();
            if name.is_empty() {
                return Err(Error::Manifest {
                    reason: "party names must be non-empty".into(),
                });
            }
            if !seen.insert(name.clone()) {
                return Err(Error::Manifest {
                    reason: format!("duplicate party name {name:?}"),
                });
            }
            labels.push(PartyLabel { id, name });
        }
        Ok(LabelSet { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&PartyLabel> {
        self.labels.get(id)
    }

    pub fn by_name(&self, name: &str) -> Option<&PartyLabel> {
        self.labels.iter().find(|l| l.name == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PartyLabel> {
        self.labels.iter()
    }

    pub fn names(&self) -> Vec<String> {
        self.labels.iter().map(|l| l.name.clone()).collect()
    }
}

/// A loaded plaintext document, optionally labeled.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawDocument {
    pub source_id: String,
    pub body: String,
    pub label: Option<PartyLabel>,
}

/// A cleaned, trimmed text block; the atomic classification instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub doc_source_id: String,
    pub index: usize,
    pub text: String,
    pub token_count: usize,
}

/// Labeled paragraphs plus their label set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Corpus {
    labels: LabelSet,
    examples: Vec<(Paragraph, PartyLabel)>,
}

impl Corpus {
    pub fn new(labels: LabelSet, examples: Vec<(Paragraph, PartyLabel)>) -> Result<Self> {
        for (_, label) in &examples {
            match labels.get(label.id) {
                Some(known) if known == label => {}
                _ => {
                    return Err(Error::UnknownLabel {
                        name: label.name.clone(),
                    })
                }
            }
        }
        Ok(Corpus { labels, examples })
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn examples(&self) -> &[(Paragraph, PartyLabel)] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Examples per class, indexed by label id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.labels.len()];
        for (_, label) in &self.examples {
            counts[label.id] += 1;
        }
        counts
    }

    /// Restrict the corpus to the named parties, re-densifying ids in the
    /// order given. Used by experiment presets that train on a subset.
    pub fn restrict_to(&self, names: &[String]) -> Result<Corpus> {
        let labels = LabelSet::new(names.to_vec())?;
        for name in names {
            if self.labels.by_name(name).is_none() {
                return Err(Error::UnknownLabel { name: name.clone() });
            }
        }
        let examples = self
            .examples
            .iter()
            .filter_map(|(p, old)| {
                labels
                    .by_name(&old.name)
                    .map(|new| (p.clone(), new.clone()))
            })
            .collect();
        Corpus::new(labels, examples)
    }
}

/// Decode UTF-8 bytes, reporting the offending byte offset on failure.
pub fn decode_utf8(bytes: Vec<u8>, source_id: &str) -> Result<String> {
    String::from_utf8(bytes).map_err(|e| Error::Encoding {
        source_id: source_id.to_string(),
        offset: e.utf8_error().valid_up_to(),
    })
}

/// Clean PDF-derived plaintext:
/// soft hyphens removed, control characters other than newline stripped,
/// runs of spaces/tabs collapsed, runs of 2+ newlines normalized to one
/// blank line, and hyphenated line-breaks rejoined ("Koali-\ntion").
/// Idempotent: cleaning twice equals cleaning once.
pub fn clean_text(raw: &str) -> String {
    // Line endings and soft hyphens first.
    let mut text = String::with_capacity(raw.len());
    let mut chars = raw.chars().peekable();
    while let Some(ch) = chars.next() {
        match ch {
            '\u{00AD}' => {}
            '\r' => {
                if chars.peek() != Some(&'\n') {
                    text.push('\n');
                }
            }
            '\t' => text.push(' '),
            c if c != '\n' && c.is_control() => {}
            c => text.push(c),
        }
    }

    // Per-line whitespace normalization, then blank-line collapsing.
    let mut lines: Vec<String> = Vec::new();
    for line in text.split('\n') {
        let mut collapsed = String::with_capacity(line.len());
        let mut last_space = false;
        for ch in line.trim().chars() {
            if ch == ' ' {
                if !last_space {
                    collapsed.push(' ');
                }
                last_space = true;
            } else {
                collapsed.push(ch);
                last_space = false;
            }
        }
        lines.push(collapsed);
    }
    while lines.first().is_some_and(|l| l.is_empty()) {
        lines.remove(0);
    }
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    let mut normalized = String::with_capacity(text.len());
    let mut blank_run = 0usize;
    for line in &lines {
        if line.is_empty() {
            blank_run += 1;
            if blank_run > 1 {
                continue;
            }
        } else {
            blank_run = 0;
        }
        if !normalized.is_empty() {
            normalized.push('\n');
        }
        normalized.push_str(line);
    }

    // Rejoin hyphenated line breaks last so line trimming cannot create new
    // join sites afterwards: letter '-' '\n' letter becomes letter letter.
    let chars: Vec<char> = normalized.chars().collect();
    let mut out = String::with_capacity(normalized.len());
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '-'
            && i + 1 < chars.len()
            && chars[i + 1] == '\n'
            && i > 0
            && chars[i - 1].is_alphabetic()
            && i + 2 < chars.len()
            && chars[i + 2].is_alphabetic()
        {
            i += 2;
            continue;
        }
        out.push(chars[i]);
        i += 1;
    }
    out
}

/// Split cleaned text on blank lines, trim each block, drop blocks with
/// fewer than `min_tokens` tokens, and index retained blocks from 0.
pub fn segment_paragraphs(cleaned: &str, source_id: &str, min_tokens: usize) -> Vec<Paragraph> {
    let mut paragraphs = Vec::new();
    for block in cleaned.split("\n\n") {
        let text = block.trim();
        if text.is_empty() {
            continue;
        }
        let token_count = features::count_tokens(text);
        if token_count < min_tokens {
            continue;
        }
        paragraphs.push(Paragraph {
            doc_source_id: source_id.to_string(),
            index: paragraphs.len(),
            text: text.to_string(),
            token_count,
        });
    }
    paragraphs
}

/// Clean and segment a raw document in one step.
pub fn segment_document(doc: &RawDocument, min_tokens: usize) -> Vec<Paragraph> {
    segment_paragraphs(&clean_text(&doc.body), &doc.source_id, min_tokens)
}

/// Five-number summary plus mean over paragraph token lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumberSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartyStats {
    pub label: PartyLabel,
    pub token_total: u64,
    pub paragraph_count: usize,
    pub length_summary: FiveNumberSummary,
}

/// Per-party corpus statistics, ordered by label id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub per_party: Vec<PartyStats>,
}

/// Quartile by linear interpolation between order statistics (type 7).
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize(lengths: &[usize]) -> FiveNumberSummary {
    let mut sorted: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    FiveNumberSummary {
        min: sorted[0],
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
        mean,
    }
}

/// Per-party token totals, paragraph counts, and length summaries.
pub fn corpus_stats(corpus: &Corpus) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut per_party = Vec::new();
    for label in corpus.labels().iter() {
        let lengths: Vec<usize> = corpus
            .examples()
            .iter()
            .filter(|(_, l)| l.id == label.id)
            .map(|(p, _)| p.token_count)
            .collect();
        if lengths.is_empty() {
            continue;
        }
        per_party.push(PartyStats {
            label: label.clone(),
            token_total: lengths.iter().map(|&l| l as u64).sum(),
            paragraph_count: lengths.len(),
            length_summary: summarize(&lengths),
        });
    }
    Ok(CorpusStats { per_party })
}

/// One party entry in the labels manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartyEntry {
    pub id: usize,
    pub name: String,
    pub file: String,
}

/// Optional unlabeled target document (e.g. a coalition agreement).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetEntry {
    pub file: String,
}

/// Labels manifest: maps corpus files to party names and ordinal ids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub party: Vec<PartyEntry>,
    pub target: Option<TargetEntry>,
}

impl CorpusManifest {
    /// Validate id density/order and build the label set.
    pub fn label_set(&self) -> Result<LabelSet> {
        let mut entries = self.party.clone();
        entries.sort_by_key(|e| e.id);
        for (i, entry) in entries.iter().enumerate() {
            if entry.id != i {
                return Err(Error::Manifest {
                    reason: format!(
                        "party ids must be dense 0..K-1; id {} for {:?}",
                        entry.id, entry.name
                    ),
                });
            }
        }
        LabelSet::new(entries.iter().map(|e| e.name.clone()))
    }

    pub fn file_for(&self, name: &str) -> Option<&str> {
        self.party
            .iter()
            .find(|e| e.name == name)
            .map(|e| e.file.as_str())
    }
}

pub fn load_manifest(path: &Path) -> Result<CorpusManifest> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::from_io(path, e))?;
    let manifest: CorpusManifest = toml::from_str(&raw).map_err(|e| Error::Manifest {
        reason: e.to_string(),
    })?;
    if manifest.party.is_empty() {
        return Err(Error::Manifest {
            reason: "manifest lists no parties".into(),
        });
    }
    manifest.label_set()?;
    Ok(manifest)
}

/// Read and decode one document file.
pub fn load_raw_document(
    path: &Path,
    source_id: &str,
    label: Option<PartyLabel>,
) -> Result<RawDocument> {
    let bytes = std::fs::read(path).map_err(|e| Error::from_io(path, e))?;
    let body = decode_utf8(bytes, source_id)?;
    Ok(RawDocument {
        source_id: source_id.to_string(),
        body,
        label,
    })
}

/// Load, clean and segment every manifesto named in the manifest.
pub fn load_corpus(dir: &Path, manifest: &CorpusManifest, min_tokens: usize) -> Result<Corpus> {
    let labels = manifest.label_set()?;
    let mut examples = Vec::new();
    for label in labels.iter() {
        let file = manifest.file_for(&label.name).ok_or_else(|| Error::Manifest {
            reason: format!("no file for party {:?}", label.name),
        })?;
        let doc = load_raw_document(&dir.join(file), &label.name, Some(label.clone()))?;
        for paragraph in segment_document(&doc, min_tokens) {
            examples.push((paragraph, label.clone()));
        }
    }
    Corpus::new(labels, examples)
}
