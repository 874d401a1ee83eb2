//! The five classifier families behind one decision contract.
//!
//! Every trained model produces a real-valued score for a test input;
//! the decision rule is shared: predict Good iff `score > 0`. A score of
//! exactly zero is assigned to Bad, the conservative choice for a
//! therapy screen. Scores are continuous, so one ROC sweep works for all
//! families.
//!
//! Training is deterministic given (data, config, seed); repeated runs
//! produce bit-identical models.

pub mod adaboost;
pub mod dtw;
pub mod nn;
pub mod svdd;
pub mod svm;

pub use adaboost::{adaboost_train, stump_search, AdaBoostModel, Stump};
pub use dtw::{dtw_distance, dtw_train, DtwModel};
pub use nn::{nn_train, NnConfig, NnModel};
pub use svdd::{svdd_train, SvddModel};
pub use svm::{svm_train, LinearSvmModel, SvmConfig};

use crate::features::Representation;
use crate::skeleton::Label;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set must contain both classes")]
    SingleClass,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("empty positive set")]
    EmptyPositives,
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty sequence")]
    EmptySequence,
    #[error("invalid config: {0}")]
    BadConfig(String),
    #[error("non-finite loss at epoch {epoch}: training diverged")]
    NonFiniteLoss { epoch: usize },
}

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("input dimension {got} does not match model dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("model expects a {expected} input")]
    WrongInputKind { expected: &'static str },
    #[error("empty sequence")]
    EmptySequence,
}

/// Test-time input: a flat feature vector, or a per-frame sequence for DTW.
#[derive(Debug, Clone, Copy)]
pub enum FeatureInput<'a> {
    Vector(&'a [f64]),
    Frames(&'a [Vec<f64>]),
}

/// Serialized-parameter encoding: decimal text that round-trips f64
/// exactly and survives infinities (stump threshold sentinels).
pub(crate) mod decimal {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_text(v: f64) -> String {
        format!("{v}")
    }

    pub fn from_text<E: serde::de::Error>(s: &str) -> Result<f64, E> {
        s.parse::<f64>()
            .map_err(|_| E::custom(format!("bad decimal value {s:?}")))
    }

    pub mod scalar {
        use super::*;
        pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&to_text(*v))
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
            let s = String::deserialize(d)?;
            from_text(&s)
        }
    }

    pub mod vector {
        use super::*;
        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let text: Vec<String> = v.iter().map(|x| to_text(*x)).collect();
            text.serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            let text = Vec::<String>::deserialize(d)?;
            text.iter().map(|s| from_text(s)).collect()
        }
    }

    pub mod matrix {
        use super::*;
        pub fn serialize<S: Serializer>(v: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
            let text: Vec<Vec<String>> = v
                .iter()
                .map(|row| row.iter().map(|x| to_text(*x)).collect())
                .collect();
            text.serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
            let text = Vec::<Vec<String>>::deserialize(d)?;
            text.iter()
                .map(|row| row.iter().map(|s| from_text(s)).collect())
                .collect()
        }
    }
}

/// Family-specific parameters of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ModelParams {
    Svm(LinearSvmModel),
    Svdd(SvddModel),
    Adaboost(AdaBoostModel),
    Dtw(DtwModel),
    Nn(NnModel),
}

/// A trained classifier together with the representation it consumes.
///
/// Serializes to a versioned JSON document with every learned parameter
/// as decimal text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: u32,
    pub rep: Representation,
    #[serde(flatten)]
    pub params: ModelParams,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

impl TrainedModel {
    pub fn new(rep: Representation, params: ModelParams) -> TrainedModel {
        TrainedModel {
            version: MODEL_FORMAT_VERSION,
            rep,
            params,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match &self.params {
            ModelParams::Svm(_) => "svm",
            ModelParams::Svdd(_) => "svdd",
            ModelParams::Adaboost(_) => "adaboost",
            ModelParams::Dtw(_) => "dtw",
            ModelParams::Nn(_) => "nn",
        }
    }

    /// Signed decision score; positive means Good.
    pub fn score(&self, input: FeatureInput<'_>) -> Result<f64, PredictError> {
        match (&self.params, input) {
            (ModelParams::Svm(m), FeatureInput::Vector(x)) => m.score(x),
            (ModelParams::Svdd(m), FeatureInput::Vector(x)) => m.score(x),
            (ModelParams::Adaboost(m), FeatureInput::Vector(x)) => m.score(x),
            (ModelParams::Nn(m), FeatureInput::Vector(x)) => m.score(x),
            (ModelParams::Dtw(m), FeatureInput::Frames(seq)) => m.score(seq),
            (ModelParams::Dtw(_), FeatureInput::Vector(_)) => Err(PredictError::WrongInputKind {
                expected: "per-frame sequence",
            }),
            (_, FeatureInput::Frames(_)) => Err(PredictError::WrongInputKind {
                expected: "flat feature vector",
            }),
        }
    }

    /// Applies the shared decision rule: Good iff score > 0.
    pub fn predict(&self, input: FeatureInput<'_>) -> Result<(Label, f64), PredictError> {
        let score = self.score(input)?;
        let label = if score > 0.0 { Label::Good } else { Label::Bad };
        Ok((label, score))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<TrainedModel, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::RepKind;

    fn rep(dim_frames: usize) -> Representation {
        Representation::new(RepKind::JointTime, dim_frames)
    }

    #[test]
    fn boundary_score_is_bad() {
        // an SVDD model scores its own center boundary point at exactly 0
        let m = TrainedModel::new(
            rep(1),
            ModelParams::Svdd(SvddModel {
                center: vec![0.0; 60],
                radius_sq: 0.0,
                nu: 0.5,
            }),
        );
        let x = vec![0.0; 60];
        let (label, score) = m.predict(FeatureInput::Vector(&x)).unwrap();
        assert_eq!(score, 0.0);
        assert_eq!(label, Label::Bad);
    }

    #[test]
    fn adaboost_single_stump_prediction() {
        let m = TrainedModel::new(
            rep(1),
            ModelParams::Adaboost(AdaBoostModel {
                stumps: vec![Stump {
                    feature: 0,
                    threshold: 0.5,
                    polarity: 1,
                    alpha: 1.0,
                }],
                rounds: 1,
            }),
        );
        let mut x = vec![0.0; 60];
        x[0] = 0.7;
        let (label, score) = m.predict(FeatureInput::Vector(&x)).unwrap();
        assert_eq!(score, 1.0);
        assert_eq!(label, Label::Good);
    }

    #[test]
    fn svm_hand_arithmetic() {
        let m = TrainedModel::new(
            rep(1),
            ModelParams::Svm(LinearSvmModel {
                weights: vec![1.0, 0.0],
                bias: -1.0,
                config: SvmConfig::default(),
            }),
        );
        let (label, score) = m.predict(FeatureInput::Vector(&[3.0, 9.0])).unwrap();
        assert_eq!(score, 2.0);
        assert_eq!(label, Label::Good);
    }

    #[test]
    fn dtw_model_rejects_vector_input() {
        let m = TrainedModel::new(
            rep(2),
            ModelParams::Dtw(DtwModel {
                template: vec![vec![0.0; 3]; 2],
                threshold: 1.0,
                frame_dim: 3,
            }),
        );
        let x = vec![0.0; 6];
        assert!(matches!(
            m.score(FeatureInput::Vector(&x)),
            Err(PredictError::WrongInputKind { .. })
        ));
    }

    #[test]
    fn model_json_round_trip_preserves_bits_and_infinities() {
        let m = TrainedModel::new(
            rep(1),
            ModelParams::Adaboost(AdaBoostModel {
                stumps: vec![
                    Stump {
                        feature: 3,
                        threshold: f64::NEG_INFINITY,
                        polarity: 1,
                        alpha: 0.5 * (3.0f64).ln(),
                    },
                    Stump {
                        feature: 1,
                        threshold: 0.1 + 0.2, // not exactly 0.3
                        polarity: -1,
                        alpha: 1e-300,
                    },
                ],
                rounds: 5,
            }),
        );
        let text = m.to_json();
        let back = TrainedModel::from_json(&text).unwrap();
        assert_eq!(m, back);
    }
}
