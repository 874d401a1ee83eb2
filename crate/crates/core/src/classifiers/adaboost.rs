//! Discrete AdaBoost over exhaustive decision stumps.
//!
//! The weak learner is a depth-1 threshold test: `h(x) = p` if
//! `x[feature] > threshold` else `-p`, with polarity `p` in {+1, -1}.
//! Each round scans every feature and every candidate threshold (the
//! midpoints between consecutive distinct sorted values, plus -inf/+inf
//! sentinels) for the global minimizer of weighted 0/1 error. Ties are
//! broken toward the lower feature index, lower threshold, and positive
//! polarity, in that order.

use super::{decimal, PredictError, TrainError};
use serde::{Deserialize, Serialize};

/// Two candidate errors closer than this are treated as tied, so the
/// deterministic tie-break rule decides instead of accumulation noise.
const TIE_EPS: f64 = 1e-12;

/// Error below this counts as a perfect stump.
const PERFECT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    #[serde(with = "decimal::scalar")]
    pub threshold: f64,
    pub polarity: i8,
    #[serde(with = "decimal::scalar")]
    pub alpha: f64,
}

impl Stump {
    pub fn decide(&self, x: &[f64]) -> f64 {
        let p = self.polarity as f64;
        if x[self.feature] > self.threshold {
            p
        } else {
            -p
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub stumps: Vec<Stump>,
    pub rounds: usize,
}

impl AdaBoostModel {
    pub fn score(&self, x: &[f64]) -> Result<f64, PredictError> {
        if let Some(stump) = self.stumps.iter().find(|s| s.feature >= x.len()) {
            return Err(PredictError::DimensionMismatch {
                expected: stump.feature + 1,
                got: x.len(),
            });
        }
        Ok(self.stumps.iter().map(|s| s.alpha * s.decide(x)).sum())
    }
}

/// The best stump found by one search, with its weighted error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StumpCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: i8,
    pub weighted_error: f64,
}

/// Per-feature sort order, computed once per training set and reused
/// across boosting rounds.
struct SortedFeatures {
    n: usize,
    dim: usize,
    /// For each feature: sample indices in ascending value order.
    order: Vec<u32>,
    /// For each feature: the values in that order.
    values: Vec<f64>,
}

impl SortedFeatures {
    fn build(x: &[&[f64]]) -> SortedFeatures {
        let n = x.len();
        let dim = x[0].len();
        let mut order = vec![0u32; n * dim];
        let mut values = vec![0.0f64; n * dim];
        let mut idx: Vec<u32> = (0..n as u32).collect();
        for f in 0..dim {
            idx.sort_by(|&a, &b| {
                x[a as usize][f]
                    .partial_cmp(&x[b as usize][f])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let base = f * n;
            for (k, &i) in idx.iter().enumerate() {
                order[base + k] = i;
                values[base + k] = x[i as usize][f];
            }
            idx.sort_unstable(); // restore 0..n for the next feature
        }
        SortedFeatures { n, dim, order, values }
    }
}

/// Sweep over one feature's sorted order; `signed` holds `w[i] * y[i]`.
///
/// Candidates are visited in tie-break order (threshold ascending,
/// positive polarity first), so a strict improvement test implements the
/// tie-break for free.
fn sweep_feature(
    feature: usize,
    sorted: &SortedFeatures,
    signed: &[f64],
    w_neg: f64,
    w_total: f64,
    best: &mut Option<StumpCandidate>,
) {
    let n = sorted.n;
    let base = feature * n;
    let ord = &sorted.order[base..base + n];
    let vals = &sorted.values[base..base + n];

    let consider = |threshold: f64, below_err: f64, best: &mut Option<StumpCandidate>| {
        for (polarity, err) in [(1i8, below_err), (-1i8, w_total - below_err)] {
            let better = match best {
                None => true,
                Some(b) => err < b.weighted_error - TIE_EPS,
            };
            if better {
                *best = Some(StumpCandidate {
                    feature,
                    threshold,
                    polarity,
                    weighted_error: err,
                });
            }
        }
    };

    // E(b) = weight of positives below the threshold + negatives above it,
    // for the +1 polarity; starts at the total negative weight (b = 0).
    let mut e = w_neg;
    consider(f64::NEG_INFINITY, e, best);
    for b in 1..n {
        e += signed[ord[b - 1] as usize];
        let (lo, hi) = (vals[b - 1], vals[b]);
        if lo != hi {
            consider((lo + hi) / 2.0, e, best);
        }
    }
    e += signed[ord[n - 1] as usize];
    consider(f64::INFINITY, e, best);
}

fn check_xy(x: &[&[f64]], y: &[f64]) -> Result<(), TrainError> {
    if x.len() < 2 {
        return Err(TrainError::TooFewSamples { needed: 2, got: x.len() });
    }
    if x.len() != y.len() {
        return Err(TrainError::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let dim = x[0].len();
    for row in x {
        if row.len() != dim {
            return Err(TrainError::DimensionMismatch { expected: dim, got: row.len() });
        }
    }
    Ok(())
}

fn require_both_classes(y: &[f64]) -> Result<(), TrainError> {
    if y.iter().all(|&v| v > 0.0) || y.iter().all(|&v| v <= 0.0) {
        return Err(TrainError::SingleClass);
    }
    Ok(())
}

/// Finds the global minimizer of weighted 0/1 error over all
/// (feature, threshold, polarity) stumps.
pub fn stump_search(x: &[&[f64]], y: &[f64], weights: &[f64]) -> Result<StumpCandidate, TrainError> {
    check_xy(x, y)?;
    if weights.len() != x.len() {
        return Err(TrainError::DimensionMismatch { expected: x.len(), got: weights.len() });
    }
    let sorted = SortedFeatures::build(x);
    Ok(stump_search_presorted(&sorted, y, weights))
}

fn stump_search_presorted(sorted: &SortedFeatures, y: &[f64], weights: &[f64]) -> StumpCandidate {
    let signed: Vec<f64> = weights.iter().zip(y).map(|(&w, &l)| w * l).collect();
    let w_total: f64 = weights.iter().sum();
    let w_neg: f64 = weights
        .iter()
        .zip(y)
        .filter(|(_, &l)| l < 0.0)
        .map(|(&w, _)| w)
        .sum();
    let mut best = None;
    for f in 0..sorted.dim {
        sweep_feature(f, sorted, &signed, w_neg, w_total, &mut best);
    }
    best.expect("at least one candidate stump")
}

fn alpha_for_error(eps: f64) -> f64 {
    0.5 * ((1.0 - eps) / eps).ln()
}

/// Alpha assigned to a perfect stump (epsilon treated as 1e-10).
pub fn alpha_cap() -> f64 {
    alpha_for_error(1e-10)
}

/// Standard discrete AdaBoost. Stops early on a perfect stump (kept, with
/// capped alpha) or when no stump beats chance (discarded).
pub fn adaboost_train(x: &[&[f64]], y: &[f64], rounds: usize) -> Result<AdaBoostModel, TrainError> {
    check_xy(x, y)?;
    require_both_classes(y)?;
    if rounds == 0 {
        return Err(TrainError::BadConfig("rounds must be >= 1".into()));
    }
    let n = x.len();
    let sorted = SortedFeatures::build(x);
    let mut weights = vec![1.0 / n as f64; n];
    let mut stumps = Vec::new();

    for _ in 0..rounds {
        let cand = stump_search_presorted(&sorted, y, &weights);
        let eps = cand.weighted_error;
        if eps < PERFECT_EPS {
            stumps.push(Stump {
                feature: cand.feature,
                threshold: cand.threshold,
                polarity: cand.polarity,
                alpha: alpha_cap(),
            });
            break;
        }
        if eps >= 0.5 - TIE_EPS {
            break;
        }
        let alpha = alpha_for_error(eps);
        let stump = Stump {
            feature: cand.feature,
            threshold: cand.threshold,
            polarity: cand.polarity,
            alpha,
        };
        let mut sum = 0.0;
        for (i, w) in weights.iter_mut().enumerate() {
            *w *= (-alpha * y[i] * stump.decide(x[i])).exp();
            sum += *w;
        }
        for w in &mut weights {
            *w /= sum;
        }
        stumps.push(stump);
    }

    Ok(AdaBoostModel { stumps, rounds })
}
