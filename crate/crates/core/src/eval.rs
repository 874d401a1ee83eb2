//! Evaluation protocols, metrics, and ROC curves.
//!
//! Two protocols: subject holdout (train on some subjects, test on the
//! rest, one run) and repeated random splits (n_train samples drawn
//! without replacement, seeded per run as `base_seed + run_index`).
//! Accuracy, TPR and FPR come from the confusion matrix; rates with a
//! zero denominator are reported as absent rather than zero.

use crate::classifiers::{
    adaboost_train, dtw_train, nn_train, svdd_train, svm_train, FeatureInput, NnConfig, SvmConfig,
    TrainError, TrainedModel,
};
use crate::classifiers::{ModelParams, PredictError};
use crate::features::{featurize_dataset, frame_vectors, RepKind, Representation};
use crate::rng;
use crate::skeleton::{Dataset, Label};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("predictions and labels differ in length ({predictions} vs {labels})")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("empty input")]
    Empty,
    #[error("subject {0} not present in the dataset")]
    UnknownSubject(u32),
    #[error("invalid split: {0}")]
    BadSplit(String),
    #[error("n_train ({n_train}) must be smaller than the dataset size ({total})")]
    TrainTooLarge { n_train: usize, total: usize },
    #[error("subject holdout is a single deterministic split; runs must be 1, got {0}")]
    HoldoutMultiRun(usize),
    #[error("test set is missing a class; ROC needs both")]
    MissingClass,
    #[error("DTW cannot consume a frequency representation ({0})")]
    DtwFrequencyRep(RepKind),
    #[error("training failed: {0}")]
    Train(#[from] TrainError),
    #[error("prediction failed: {0}")]
    Predict(#[from] PredictError),
    #[error("feature extraction failed: {0}")]
    Features(#[from] crate::features::FeatureError),
}

/// How to divide a dataset into train and test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitSpec {
    SubjectHoldout {
        train_subjects: BTreeSet<u32>,
        test_subjects: BTreeSet<u32>,
    },
    RandomSplit {
        n_train: usize,
        seed: u64,
    },
}

/// Splits per-sample subject ids into train/test index lists forming a
/// partition of `0..subjects.len()`.
pub fn split_indices(subjects: &[u32], spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    let n = subjects.len();
    if n == 0 {
        return Err(EvalError::Empty);
    }
    match spec {
        SplitSpec::SubjectHoldout {
            train_subjects,
            test_subjects,
        } => {
            if train_subjects.is_empty() || test_subjects.is_empty() {
                return Err(EvalError::BadSplit("both subject sets must be nonempty".into()));
            }
            if !train_subjects.is_disjoint(test_subjects) {
                return Err(EvalError::BadSplit("train and test subjects overlap".into()));
            }
            let present: BTreeSet<u32> = subjects.iter().copied().collect();
            for &s in train_subjects.iter().chain(test_subjects.iter()) {
                if !present.contains(&s) {
                    return Err(EvalError::UnknownSubject(s));
                }
            }
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (i, subj) in subjects.iter().enumerate() {
                if train_subjects.contains(subj) {
                    train.push(i);
                } else if test_subjects.contains(subj) {
                    test.push(i);
                } else {
                    return Err(EvalError::BadSplit(format!(
                        "subject {subj} is in neither subject set"
                    )));
                }
            }
            Ok((train, test))
        }
        SplitSpec::RandomSplit { n_train, seed } => {
            if *n_train == 0 {
                return Err(EvalError::BadSplit("n_train must be >= 1".into()));
            }
            if *n_train >= n {
                return Err(EvalError::TrainTooLarge {
                    n_train: *n_train,
                    total: n,
                });
            }
            let mut order: Vec<usize> = (0..n).collect();
            let mut rng = rng::seeded(*seed);
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                order.swap(i, j);
            }
            let mut train: Vec<usize> = order[..*n_train].to_vec();
            let mut test: Vec<usize> = order[*n_train..].to_vec();
            train.sort_unstable();
            test.sort_unstable();
            Ok((train, test))
        }
    }
}

/// Splits a dataset into train and test datasets.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset), EvalError> {
    let subjects: Vec<u32> = dataset.samples.iter().map(|s| s.subject_id).collect();
    let (train_idx, test_idx) = split_indices(&subjects, spec)?;
    let pick = |idx: &[usize]| Dataset {
        samples: idx.iter().map(|&i| dataset.samples[i].clone()).collect(),
        provenance: dataset.provenance.clone(),
        preprocessed: dataset.preprocessed,
    };
    Ok((pick(&train_idx), pick(&test_idx)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub confusion: Confusion,
}

/// Confusion counts and rates; `Good` is the positive class.
pub fn compute_metrics(predictions: &[Label], labels: &[Label]) -> Result<Metrics, EvalError> {
    if predictions.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut c = Confusion {
        true_pos: 0,
        false_pos: 0,
        true_neg: 0,
        false_neg: 0,
    };
    for (&p, &l) in predictions.iter().zip(labels) {
        match (l, p) {
            (Label::Good, Label::Good) => c.true_pos += 1,
            (Label::Good, Label::Bad) => c.false_neg += 1,
            (Label::Bad, Label::Good) => c.false_pos += 1,
            (Label::Bad, Label::Bad) => c.true_neg += 1,
        }
    }
    let total = predictions.len() as f64;
    let positives = c.true_pos + c.false_neg;
    let negatives = c.false_pos + c.true_neg;
    Ok(Metrics {
        accuracy: (c.true_pos + c.true_neg) as f64 / total,
        tpr: (positives > 0).then(|| c.true_pos as f64 / positives as f64),
        fpr: (negatives > 0).then(|| c.false_pos as f64 / negatives as f64),
        confusion: c,
    })
}

/// Classifier family plus hyperparameters, as selected on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainerSpec {
    Svm { lambda: f64, epochs: usize },
    Svdd { nu: f64 },
    AdaBoost { rounds: usize },
    Dtw,
    Nn(NnTrainerSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnTrainerSpec {
    pub hidden_sizes: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl TrainerSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            TrainerSpec::Svm { .. } => "svm",
            TrainerSpec::Svdd { .. } => "svdd",
            TrainerSpec::AdaBoost { .. } => "adaboost",
            TrainerSpec::Dtw => "dtw",
            TrainerSpec::Nn(_) => "nn",
        }
    }

    pub fn needs_sequences(&self) -> bool {
        matches!(self, TrainerSpec::Dtw)
    }
}

/// Features of a whole preprocessed dataset in one representation,
/// prepared once and sliced per run.
#[derive(Debug, Clone)]
pub struct EvalData {
    pub rep: Representation,
    pub vectors: Vec<Vec<f64>>,
    /// Per-frame rows for DTW; present for time-domain representations.
    pub sequences: Option<Vec<Vec<Vec<f64>>>>,
    pub labels: Vec<Label>,
    pub subjects: Vec<u32>,
}

impl EvalData {
    pub fn prepare(dataset: &Dataset, kind: RepKind) -> Result<EvalData, EvalError> {
        let set = featurize_dataset(dataset, kind)?;
        let sequences = if kind.is_frequency() {
            None
        } else {
            let frames = set.rep.frames;
            Some(
                dataset
                    .samples
                    .iter()
                    .map(|s| frame_vectors(s, kind, frames))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        };
        Ok(EvalData {
            rep: set.rep,
            vectors: set.vectors,
            sequences,
            labels: set.labels,
            subjects: set.subjects,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Trains one model of the requested family on the given sample indices.
pub fn train_model(
    data: &EvalData,
    train_idx: &[usize],
    trainer: &TrainerSpec,
    seed: u64,
) -> Result<TrainedModel, EvalError> {
    let rows = |idx: &[usize]| -> Vec<&[f64]> {
        idx.iter().map(|&i| data.vectors[i].as_slice()).collect()
    };
    let signs = |idx: &[usize]| -> Vec<f64> {
        idx.iter().map(|&i| data.labels[i].sign()).collect()
    };
    let params = match trainer {
        TrainerSpec::Svm { lambda, epochs } => {
            let cfg = SvmConfig {
                lambda: *lambda,
                epochs: *epochs,
                seed,
            };
            ModelParams::Svm(svm_train(&rows(train_idx), &signs(train_idx), &cfg)?)
        }
        TrainerSpec::Svdd { nu } => {
            let pos: Vec<usize> = train_idx
                .iter()
                .copied()
                .filter(|&i| data.labels[i] == Label::Good)
                .collect();
            ModelParams::Svdd(svdd_train(&rows(&pos), *nu)?)
        }
        TrainerSpec::AdaBoost { rounds } => ModelParams::Adaboost(adaboost_train(
            &rows(train_idx),
            &signs(train_idx),
            *rounds,
        )?),
        TrainerSpec::Dtw => {
            let seqs = data
                .sequences
                .as_ref()
                .ok_or(EvalError::DtwFrequencyRep(data.rep.kind))?;
            let pos: Vec<&[Vec<f64>]> = train_idx
                .iter()
                .filter(|&&i| data.labels[i] == Label::Good)
                .map(|&i| seqs[i].as_slice())
                .collect();
            ModelParams::Dtw(dtw_train(&pos)?)
        }
        TrainerSpec::Nn(nn) => {
            let cfg = NnConfig {
                hidden_sizes: nn.hidden_sizes.clone(),
                learning_rate: nn.learning_rate,
                epochs: nn.epochs,
                batch_size: nn.batch_size,
                seed,
            };
            ModelParams::Nn(nn_train(&rows(train_idx), &signs(train_idx), &cfg)?)
        }
    };
    Ok(TrainedModel::new(data.rep, params))
}

/// Scores one sample through a trained model with the right input kind.
pub fn score_sample(model: &TrainedModel, data: &EvalData, idx: usize) -> Result<f64, EvalError> {
    let input = if matches!(model.params, ModelParams::Dtw(_)) {
        let seqs = data
            .sequences
            .as_ref()
            .ok_or(EvalError::DtwFrequencyRep(data.rep.kind))?;
        FeatureInput::Frames(seqs[idx].as_slice())
    } else {
        FeatureInput::Vector(data.vectors[idx].as_slice())
    };
    Ok(model.score(input)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run_index: usize,
    pub seed: u64,
    pub metrics: Metrics,
    /// (score, true label) per test sample, for ROC sweeps.
    pub scores: Vec<(f64, Label)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean_accuracy: f64,
    pub mean_tpr: Option<f64>,
    pub mean_fpr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub runs: Vec<RunResult>,
    pub aggregate: Aggregate,
}

/// The two experimental protocols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    SubjectHoldout {
        train_subjects: BTreeSet<u32>,
        test_subjects: BTreeSet<u32>,
    },
    Random {
        n_train: usize,
    },
}

impl Protocol {
    pub fn describe(&self) -> String {
        match self {
            Protocol::SubjectHoldout {
                train_subjects,
                test_subjects,
            } => {
                let fmt = |s: &BTreeSet<u32>| {
                    s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
                };
                format!("holdout:{}/{}", fmt(train_subjects), fmt(test_subjects))
            }
            Protocol::Random { n_train } => format!("random:{n_train}"),
        }
    }
}

/// Runs `n_runs` train/evaluate cycles and aggregates the metrics.
///
/// Run `i` uses seed `base_seed + i` for both its split and its trainer.
/// Subject holdout is deterministic, so it requires `n_runs == 1`.
pub fn run_protocol(
    data: &EvalData,
    trainer: &TrainerSpec,
    protocol: &Protocol,
    n_runs: usize,
    base_seed: u64,
) -> Result<ProtocolResult, EvalError> {
    if n_runs == 0 {
        return Err(EvalError::BadSplit("n_runs must be >= 1".into()));
    }
    if matches!(protocol, Protocol::SubjectHoldout { .. }) && n_runs != 1 {
        return Err(EvalError::HoldoutMultiRun(n_runs));
    }

    let mut runs = Vec::with_capacity(n_runs);
    for run_index in 0..n_runs {
        let seed = base_seed.wrapping_add(run_index as u64);
        let spec = match protocol {
            Protocol::SubjectHoldout {
                train_subjects,
                test_subjects,
            } => SplitSpec::SubjectHoldout {
                train_subjects: train_subjects.clone(),
                test_subjects: test_subjects.clone(),
            },
            Protocol::Random { n_train } => SplitSpec::RandomSplit {
                n_train: *n_train,
                seed,
            },
        };
        let (train_idx, test_idx) = split_indices(&data.subjects, &spec)?;
        let model = train_model(data, &train_idx, trainer, seed)?;

        let mut scores = Vec::with_capacity(test_idx.len());
        let mut predictions = Vec::with_capacity(test_idx.len());
        let mut labels = Vec::with_capacity(test_idx.len());
        for &i in &test_idx {
            let score = score_sample(&model, data, i)?;
            scores.push((score, data.labels[i]));
            predictions.push(if score > 0.0 { Label::Good } else { Label::Bad });
            labels.push(data.labels[i]);
        }
        let metrics = compute_metrics(&predictions, &labels)?;
        runs.push(RunResult {
            run_index,
            seed,
            metrics,
            scores,
        });
    }

    let aggregate = aggregate_runs(&runs);
    Ok(ProtocolResult { runs, aggregate })
}

/// Arithmetic mean over runs; absent rates are skipped, and the mean is
/// absent if no run had the rate.
pub fn aggregate_runs(runs: &[RunResult]) -> Aggregate {
    let n = runs.len() as f64;
    let mean_opt = |extract: fn(&Metrics) -> Option<f64>| {
        let vals: Vec<f64> = runs.iter().filter_map(|r| extract(&r.metrics)).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    };
    Aggregate {
        mean_accuracy: runs.iter().map(|r| r.metrics.accuracy).sum::<f64>() / n,
        mean_tpr: mean_opt(|m| m.tpr),
        mean_fpr: mean_opt(|m| m.fpr),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Index of the run the curve was computed from.
    pub run_index: usize,
    pub points: Vec<RocPoint>,
}

/// ROC of the median-accuracy run (lower median: index `(n-1)/2` of the
/// runs sorted by accuracy ascending), sweeping the decision threshold
/// over that run's distinct scores.
///
/// Each point applies the rule "Good iff score > threshold"; the final
/// point uses threshold -inf, so the curve always ends at (1, 1).
pub fn roc_curve(runs: &[RunResult]) -> Result<RocCurve, EvalError> {
    if runs.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut by_acc: Vec<usize> = (0..runs.len()).collect();
    by_acc.sort_by(|&a, &b| {
        runs[a]
            .metrics
            .accuracy
            .partial_cmp(&runs[b].metrics.accuracy)
            .unwrap()
            .then(runs[a].run_index.cmp(&runs[b].run_index))
    });
    let median = &runs[by_acc[(runs.len() - 1) / 2]];

    let positives = median.scores.iter().filter(|(_, l)| *l == Label::Good).count();
    let negatives = median.scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::MissingClass);
    }

    let mut sorted: Vec<(f64, Label)> = median.scores.clone();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let mut points = Vec::new();
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        points.push(RocPoint {
            threshold,
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
        });
        while i < sorted.len() && sorted[i].0 == threshold {
            match sorted[i].1 {
                Label::Good => tp += 1,
                Label::Bad => fp += 1,
            }
            i += 1;
        }
    }
    points.push(RocPoint {
        threshold: f64::NEG_INFINITY,
        fpr: 1.0,
        tpr: 1.0,
    });
    Ok(RocCurve {
        run_index: median.run_index,
        points,
    })
}

/// The JSON report written by the CLI: all per-run results plus the
/// aggregate, with enough metadata to recompute everything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub family: String,
    pub rep: Representation,
    pub protocol: String,
    pub n_runs: usize,
    pub base_seed: u64,
    pub aggregate: Aggregate,
    pub runs: Vec<RunResult>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::{Frame, SkeletonSample};
    use proptest::prelude::*;

    fn subject_set(ids: &[u32]) -> BTreeSet<u32> {
        ids.iter().copied().collect()
    }

    /// Subjects laid out like the Blast-Off collection: per-subject
    /// (positive, negative) counts.
    const TABLE_COUNTS: [(u32, usize, usize); 5] =
        [(1, 11, 10), (2, 13, 13), (3, 10, 10), (4, 14, 14), (5, 15, 15)];

    fn table_subjects() -> Vec<u32> {
        let mut subjects = Vec::new();
        for (subj, pos, neg) in TABLE_COUNTS {
            for _ in 0..pos + neg {
                subjects.push(subj);
            }
        }
        subjects
    }

    fn table_labels() -> Vec<Label> {
        let mut labels = Vec::new();
        for (_, pos, neg) in TABLE_COUNTS {
            labels.extend(std::iter::repeat(Label::Good).take(pos));
            labels.extend(std::iter::repeat(Label::Bad).take(neg));
        }
        labels
    }

    #[test]
    fn holdout_345_vs_12_gives_78_47() {
        let subjects = table_subjects();
        assert_eq!(subjects.len(), 125);
        let spec = SplitSpec::SubjectHoldout {
            train_subjects: subject_set(&[3, 4, 5]),
            test_subjects: subject_set(&[1, 2]),
        };
        let (train, test) = split_indices(&subjects, &spec).unwrap();
        assert_eq!(train.len(), 78);
        assert_eq!(test.len(), 47);
    }

    #[test]
    fn holdout_123_vs_45_partitions_by_subject() {
        let subjects = table_subjects();
        let spec = SplitSpec::SubjectHoldout {
            train_subjects: subject_set(&[1, 2, 3]),
            test_subjects: subject_set(&[4, 5]),
        };
        let (train, test) = split_indices(&subjects, &spec).unwrap();
        // subjects 1,2,3 contribute 21 + 26 + 20 samples
        assert_eq!(train.len(), 67);
        assert_eq!(test.len(), 58);
        for &i in &train {
            assert!(subjects[i] <= 3);
        }
        for &i in &test {
            assert!(subjects[i] >= 4);
        }
    }

    #[test]
    fn holdout_rejects_unknown_subject() {
        let subjects = table_subjects();
        let spec = SplitSpec::SubjectHoldout {
            train_subjects: subject_set(&[1, 2, 9]),
            test_subjects: subject_set(&[4, 5]),
        };
        assert!(matches!(
            split_indices(&subjects, &spec),
            Err(EvalError::UnknownSubject(9))
        ));
    }

    #[test]
    fn random_80_of_125_gives_80_45() {
        let subjects = table_subjects();
        let spec = SplitSpec::RandomSplit { n_train: 80, seed: 7 };
        let (train, test) = split_indices(&subjects, &spec).unwrap();
        assert_eq!(train.len(), 80);
        assert_eq!(test.len(), 45);
    }

    #[test]
    fn random_split_is_deterministic_per_seed() {
        let subjects = table_subjects();
        let spec = SplitSpec::RandomSplit { n_train: 80, seed: 41 };
        let a = split_indices(&subjects, &spec).unwrap();
        let b = split_indices(&subjects, &spec).unwrap();
        assert_eq!(a, b);
        let other = split_indices(
            &subjects,
            &SplitSpec::RandomSplit { n_train: 80, seed: 42 },
        )
        .unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn random_split_rejects_oversized_train() {
        let subjects = table_subjects();
        let spec = SplitSpec::RandomSplit { n_train: 125, seed: 1 };
        assert!(matches!(
            split_indices(&subjects, &spec),
            Err(EvalError::TrainTooLarge { .. })
        ));
    }

    #[test]
    fn split_on_dataset_preserves_samples() {
        let samples: Vec<SkeletonSample> = table_subjects()
            .iter()
            .zip(table_labels())
            .map(|(&subj, label)| SkeletonSample {
                subject_id: subj,
                exercise: "Blast-Off".into(),
                label,
                frames: vec![Frame::zero(), Frame::zero()],
            })
            .collect();
        let ds = Dataset::new(samples, "test");
        let spec = SplitSpec::SubjectHoldout {
            train_subjects: subject_set(&[3, 4, 5]),
            test_subjects: subject_set(&[1, 2]),
        };
        let (train, test) = split(&ds, &spec).unwrap();
        assert_eq!(train.len() + test.len(), ds.len());
        assert_eq!(train.len(), 78);
    }

    #[test]
    fn metrics_all_correct() {
        let labels = vec![Label::Good, Label::Bad, Label::Good];
        let m = compute_metrics(&labels, &labels).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.fpr, Some(0.0));
        assert_eq!(m.tpr, Some(1.0));
    }

    #[test]
    fn metrics_all_inverted() {
        let labels = vec![Label::Good, Label::Bad, Label::Good, Label::Bad];
        let preds: Vec<Label> = labels
            .iter()
            .map(|l| match l {
                Label::Good => Label::Bad,
                Label::Bad => Label::Good,
            })
            .collect();
        let m = compute_metrics(&preds, &labels).unwrap();
        assert_eq!(m.accuracy, 0.0);
        assert_eq!(m.tpr, Some(0.0));
        assert_eq!(m.fpr, Some(1.0));
    }

    #[test]
    fn metrics_hand_case() {
        use Label::{Bad as B, Good as G};
        let labels = [G, G, G, B, B, B];
        let preds = [G, G, B, B, B, G];
        let m = compute_metrics(&preds, &labels).unwrap();
        assert_eq!(m.confusion.true_pos, 2);
        assert_eq!(m.confusion.false_neg, 1);
        assert_eq!(m.confusion.true_neg, 2);
        assert_eq!(m.confusion.false_pos, 1);
        assert!((m.accuracy - 4.0 / 6.0).abs() < 1e-15);
        assert!((m.tpr.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.fpr.unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn metrics_absent_rates_on_one_class() {
        let labels = [Label::Good, Label::Good];
        let preds = [Label::Good, Label::Bad];
        let m = compute_metrics(&preds, &labels).unwrap();
        assert_eq!(m.fpr, None);
        assert_eq!(m.tpr, Some(0.5));
    }

    #[test]
    fn metrics_rejects_length_mismatch() {
        assert!(matches!(
            compute_metrics(&[Label::Good], &[Label::Good, Label::Bad]),
            Err(EvalError::LengthMismatch { .. })
        ));
    }

    fn fake_run(run_index: usize, scores: Vec<(f64, Label)>) -> RunResult {
        let preds: Vec<Label> = scores
            .iter()
            .map(|(s, _)| if *s > 0.0 { Label::Good } else { Label::Bad })
            .collect();
        let labels: Vec<Label> = scores.iter().map(|(_, l)| *l).collect();
        RunResult {
            run_index,
            seed: run_index as u64,
            metrics: compute_metrics(&preds, &labels).unwrap(),
            scores,
        }
    }

    #[test]
    fn roc_perfect_separation_passes_through_0_1() {
        let run = fake_run(
            0,
            vec![
                (2.0, Label::Good),
                (1.5, Label::Good),
                (-0.5, Label::Bad),
                (-1.0, Label::Bad),
            ],
        );
        let curve = roc_curve(&[run]).unwrap();
        assert!(curve
            .points
            .iter()
            .any(|p| p.fpr == 0.0 && p.tpr == 1.0));
        let first = curve.points.first().unwrap();
        let last = curve.points.last().unwrap();
        assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    }

    #[test]
    fn roc_identical_scores_is_two_points() {
        let run = fake_run(
            0,
            vec![(0.3, Label::Good), (0.3, Label::Bad), (0.3, Label::Good)],
        );
        let curve = roc_curve(&[run]).unwrap();
        assert_eq!(curve.points.len(), 2);
        assert_eq!((curve.points[0].fpr, curve.points[0].tpr), (0.0, 0.0));
        assert_eq!((curve.points[1].fpr, curve.points[1].tpr), (1.0, 1.0));
    }

    #[test]
    fn roc_matches_brute_force_sweep() {
        let mut state = 0xacc5u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let scores: Vec<(f64, Label)> = (0..10)
            .map(|_| {
                let s = (next() * 8.0).round() / 4.0 - 1.0; // generate some exact ties
                let l = if next() > 0.5 { Label::Good } else { Label::Bad };
                (s, l)
            })
            .collect();
        let positives = scores.iter().filter(|(_, l)| *l == Label::Good).count();
        let negatives = scores.len() - positives;
        if positives == 0 || negatives == 0 {
            return;
        }
        let run = fake_run(0, scores.clone());
        let curve = roc_curve(&[run]).unwrap();

        // brute force: every distinct score as a threshold, plus -inf
        let mut thresholds: Vec<f64> = scores.iter().map(|(s, _)| *s).collect();
        thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
        thresholds.dedup();
        thresholds.push(f64::NEG_INFINITY);
        assert_eq!(curve.points.len(), thresholds.len());
        for (point, &th) in curve.points.iter().zip(&thresholds) {
            let tp = scores
                .iter()
                .filter(|(s, l)| *s > th && *l == Label::Good)
                .count();
            let fp = scores
                .iter()
                .filter(|(s, l)| *s > th && *l == Label::Bad)
                .count();
            assert_eq!(point.threshold, th);
            assert!((point.tpr - tp as f64 / positives as f64).abs() < 1e-15);
            assert!((point.fpr - fp as f64 / negatives as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn roc_picks_lower_median_run_by_accuracy() {
        let runs = vec![
            fake_run(0, vec![(1.0, Label::Good), (0.5, Label::Bad)]), // acc 0.5
            fake_run(1, vec![(1.0, Label::Good), (-0.5, Label::Bad)]), // acc 1.0
            fake_run(2, vec![(-1.0, Label::Good), (0.5, Label::Bad)]), // acc 0.0
        ];
        let curve = roc_curve(&runs).unwrap();
        assert_eq!(curve.run_index, 0); // sorted accuracies: 0.0, 0.5, 1.0
    }

    #[test]
    fn roc_rejects_single_class_test_set() {
        let run = fake_run(0, vec![(1.0, Label::Good), (0.5, Label::Good)]);
        assert!(matches!(roc_curve(&[run]), Err(EvalError::MissingClass)));
    }

    #[test]
    fn aggregate_of_single_run_is_the_run() {
        let run = fake_run(
            0,
            vec![(1.0, Label::Good), (-1.0, Label::Bad), (0.5, Label::Bad)],
        );
        let agg = aggregate_runs(&[run.clone()]);
        assert_eq!(agg.mean_accuracy, run.metrics.accuracy);
        assert_eq!(agg.mean_tpr, run.metrics.tpr);
        assert_eq!(agg.mean_fpr, run.metrics.fpr);
    }

    #[test]
    fn aggregate_of_identical_runs_equals_either() {
        let run = fake_run(0, vec![(1.0, Label::Good), (0.5, Label::Bad)]);
        let mut run2 = run.clone();
        run2.run_index = 1;
        let agg = aggregate_runs(&[run.clone(), run2]);
        assert_eq!(agg.mean_accuracy, run.metrics.accuracy);
    }

    #[test]
    fn aggregate_mean_matches_recomputation() {
        let runs: Vec<RunResult> = (0..51)
            .map(|i| {
                let good_score = if i % 3 == 0 { -1.0 } else { 1.0 };
                fake_run(
                    i,
                    vec![
                        (good_score, Label::Good),
                        (-0.3, Label::Bad),
                        (0.2 * (i % 5) as f64 - 0.3, Label::Bad),
                    ],
                )
            })
            .collect();
        let agg = aggregate_runs(&runs);
        let mean: f64 = runs.iter().map(|r| r.metrics.accuracy).sum::<f64>() / 51.0;
        assert!((agg.mean_accuracy - mean).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn splits_partition_the_dataset(seed in 0u64..5000, n_train in 1usize..124) {
            let subjects = table_subjects();
            let spec = SplitSpec::RandomSplit { n_train, seed };
            let (train, test) = split_indices(&subjects, &spec).unwrap();
            prop_assert_eq!(train.len() + test.len(), subjects.len());
            let mut all: Vec<usize> = train.iter().chain(test.iter()).copied().collect();
            all.sort_unstable();
            let expected: Vec<usize> = (0..subjects.len()).collect();
            prop_assert_eq!(all, expected);
        }

        #[test]
        fn accuracy_times_test_size_is_integer(case in 0u64..500) {
            let mut state = case.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut next = move || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64
            };
            let n = 1 + (next() * 20.0) as usize;
            let labels: Vec<Label> = (0..n).map(|_| if next() > 0.5 { Label::Good } else { Label::Bad }).collect();
            let preds: Vec<Label> = (0..n).map(|_| if next() > 0.5 { Label::Good } else { Label::Bad }).collect();
            let m = compute_metrics(&preds, &labels).unwrap();
            let product = m.accuracy * n as f64;
            let correct = (m.confusion.true_pos + m.confusion.true_neg) as f64;
            prop_assert!((product - correct).abs() < 1e-9);
        }
    }
}
