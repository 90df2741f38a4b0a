//! Versioned model artifact: magic header, format version, then a JSON
//! payload carrying the backend tag, label set, feature config,
//! vocabulary, and parameters. Save -> load -> predict is bit-identical.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureConfig, Vocabulary};

use super::ClassifierModel;

pub const ARTIFACT_MAGIC: &[u8; 8] = b"MNFSTCLS";
pub const ARTIFACT_VERSION: u16 = 1;

/// Everything needed to reproduce predictions on new text.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub model: ClassifierModel,
    pub feature_config: FeatureConfig,
    pub vocabulary: Vocabulary,
}

#[derive(Deserialize)]
struct BackendProbe {
    backend: String,
}

const KNOWN_BACKENDS: [&str; 2] = ["softmax", "naive-bayes"];
/// Reserved for an external transformer adapter; not built in.
const RESERVED_BACKENDS: [&str; 1] = ["transformer"];

/// Serialize an artifact to bytes (header + JSON payload).
pub fn artifact_to_bytes(artifact: &ModelArtifact) -> Result<Vec<u8>> {
    let payload = serde_json::to_vec(artifact).map_err(|e| Error::Artifact {
        reason: format!("serialization failed: {e}"),
    })?;
    let mut bytes = Vec::with_capacity(payload.len() + 10);
    bytes.extend_from_slice(ARTIFACT_MAGIC);
    bytes.extend_from_slice(&ARTIFACT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&payload);
    Ok(bytes)
}

/// Parse artifact bytes, validating magic, version, and parameters.
pub fn artifact_from_bytes(bytes: &[u8]) -> Result<ModelArtifact> {
    if bytes.len() < 10 || &bytes[..8] != ARTIFACT_MAGIC {
        return Err(Error::Artifact {
            reason: "bad magic header; not a model artifact".into(),
        });
    }
    let version = u16::from_le_bytes([bytes[8], bytes[9]]);
    if version != ARTIFACT_VERSION {
        return Err(Error::Artifact {
            reason: format!("unsupported artifact version {version}, expected {ARTIFACT_VERSION}"),
        });
    }
    let payload = &bytes[10..];
    let probe: BackendProbe = serde_json::from_slice(payload).map_err(|e| Error::Artifact {
        reason: format!("unreadable payload: {e}"),
    })?;
    if RESERVED_BACKENDS.contains(&probe.backend.as_str()) {
        return Err(Error::Artifact {
            reason: format!(
                "backend {:?} is reserved for an external adapter and not built in",
                probe.backend
            ),
        });
    }
    if !KNOWN_BACKENDS.contains(&probe.backend.as_str()) {
        return Err(Error::Artifact {
            reason: format!("unknown backend {:?}", probe.backend),
        });
    }
    let artifact: ModelArtifact = serde_json::from_slice(payload).map_err(|e| Error::Artifact {
        reason: format!("malformed payload: {e}"),
    })?;
    match &artifact.model {
        ClassifierModel::Softmax(m) => m.validate()?,
        ClassifierModel::NaiveBayes(m) => m.validate()?,
    }
    artifact.feature_config.validate()?;
    if artifact.model.num_features() != artifact.vocabulary.len() {
        return Err(Error::Artifact {
            reason: format!(
                "model expects {} features but vocabulary has {} terms",
                artifact.model.num_features(),
                artifact.vocabulary.len()
            ),
        });
    }
    Ok(artifact)
}

pub fn save_model(path: &Path, artifact: &ModelArtifact) -> Result<()> {
    let bytes = artifact_to_bytes(artifact)?;
    let mut file = std::fs::File::create(path).map_err(|e| Error::from_io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::from_io(path, e))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelArtifact> {
    let bytes = std::fs::read(path).map_err(|e| Error::from_io(path, e))?;
    artifact_from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LabelSet;
    use crate::features::{build_vocabulary, vectorize};
    use crate::model::{train_naive_bayes, train_softmax, TrainConfig};

    fn trained_artifact() -> (ModelArtifact, Vec<crate::features::FeatureVector>) {
        let config = FeatureConfig::default();
        let docs = [("rot rot links", 0), ("blau blau recht", 1), ("rot links", 0), ("blau recht", 1)];
        let vocab = build_vocabulary(docs.iter().map(|(t, _)| *t), &config).unwrap();
        let examples: Vec<_> = docs
            .iter()
            .map(|(t, y)| (vectorize(t, &vocab, &config), *y))
            .collect();
        let labels = LabelSet::new(["rot", "blau"]).unwrap();
        let model =
            train_softmax(&labels, &examples, vocab.len(), &TrainConfig::default()).unwrap();
        let vectors = examples.into_iter().map(|(v, _)| v).collect();
        (
            ModelArtifact {
                model: ClassifierModel::Softmax(model),
                feature_config: config,
                vocabulary: vocab,
            },
            vectors,
        )
    }

    #[test]
    fn round_trip_preserves_predictions_bitwise() {
        let (artifact, vectors) = trained_artifact();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        save_model(&path, &artifact).unwrap();
        let loaded = load_model(&path).unwrap();
        for v in &vectors {
            let a = artifact.model.predict_distribution(v).unwrap();
            let b = loaded.model.predict_distribution(v).unwrap();
            let a_bits: Vec<u64> = a.probabilities.iter().map(|p| p.to_bits()).collect();
            let b_bits: Vec<u64> = b.probabilities.iter().map(|p| p.to_bits()).collect();
            assert_eq!(a_bits, b_bits);
            assert_eq!(a.argmax_label, b.argmax_label);
        }
    }

    #[test]
    fn save_is_byte_deterministic() {
        let (artifact, _) = trained_artifact();
        assert_eq!(
            artifact_to_bytes(&artifact).unwrap(),
            artifact_to_bytes(&artifact).unwrap()
        );
    }

    #[test]
    fn naive_bayes_round_trips() {
        let config = FeatureConfig {
            weighting: crate::features::Weighting::Counts,
            ..FeatureConfig::default()
        };
        let docs = [("x x y", 0), ("y y", 1)];
        let vocab = build_vocabulary(docs.iter().map(|(t, _)| *t), &config).unwrap();
        let examples: Vec<_> = docs
            .iter()
            .map(|(t, y)| (vectorize(t, &vocab, &config), *y))
            .collect();
        let labels = LabelSet::new(["a", "b"]).unwrap();
        let nb = train_naive_bayes(&labels, &examples, vocab.len(), 1.0).unwrap();
        let artifact = ModelArtifact {
            model: ClassifierModel::NaiveBayes(nb),
            feature_config: config,
            vocabulary: vocab,
        };
        let bytes = artifact_to_bytes(&artifact).unwrap();
        let loaded = artifact_from_bytes(&bytes).unwrap();
        assert_eq!(loaded.model.backend_tag(), "naive-bayes");
    }

    #[test]
    fn bad_magic_is_rejected() {
        let err = artifact_from_bytes(b"NOTMODEL\x01\x00{}").unwrap_err();
        assert!(matches!(err, Error::Artifact { .. }));
    }

    #[test]
    fn wrong_version_is_rejected() {
        let (artifact, _) = trained_artifact();
        let mut bytes = artifact_to_bytes(&artifact).unwrap();
        bytes[8] = 99;
        assert!(matches!(
            artifact_from_bytes(&bytes),
            Err(Error::Artifact { .. })
        ));
    }

    #[test]
    fn reserved_transformer_backend_is_refused_with_clear_message() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(ARTIFACT_MAGIC);
        bytes.extend_from_slice(&ARTIFACT_VERSION.to_le_bytes());
        bytes.extend_from_slice(br#"{"backend":"transformer","weights":"elsewhere"}"#);
        let err = artifact_from_bytes(&bytes).unwrap_err();
        match err {
            Error::Artifact { reason } => assert!(reason.contains("transformer")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_file_is_rejected() {
        assert!(artifact_from_bytes(b"MNFST").is_err());
    }
}
