//! One-class hypersphere classifier (SVDD-style).
//!
//! The model encloses the positive training data in a ball centered at
//! the sample mean; the squared radius is the ceil((1-nu)*n)-th smallest
//! squared distance to the center, so at most a `nu` fraction of the
//! training positives fall outside. Score is `radius_sq - ||x - c||^2`.

use super::{decimal, PredictError, TrainError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvddModel {
    #[serde(with = "decimal::vector")]
    pub center: Vec<f64>,
    #[serde(with = "decimal::scalar")]
    pub radius_sq: f64,
    #[serde(with = "decimal::scalar")]
    pub nu: f64,
}

impl SvddModel {
    pub fn score(&self, x: &[f64]) -> Result<f64, PredictError> {
        if x.len() != self.center.len() {
            return Err(PredictError::DimensionMismatch {
                expected: self.center.len(),
                got: x.len(),
            });
        }
        let dist_sq: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(self.radius_sq - dist_sq)
    }
}

/// Trains on positive samples only.
pub fn svdd_train(x_pos: &[&[f64]], nu: f64) -> Result<SvddModel, TrainError> {
    if x_pos.is_empty() {
        return Err(TrainError::EmptyPositives);
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(TrainError::BadConfig(format!("nu must be in (0, 1], got {nu}")));
    }
    let n = x_pos.len();
    let dim = x_pos[0].len();
    for row in x_pos {
        if row.len() != dim {
            return Err(TrainError::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
    }
    let mut center = vec![0.0f64; dim];
    for row in x_pos {
        for (c, &v) in center.iter_mut().zip(row.iter()) {
            *c += v;
        }
    }
    for c in &mut center {
        *c /= n as f64;
    }

    let mut dists: Vec<f64> = x_pos
        .iter()
        .map(|row| {
            row.iter()
                .zip(&center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        })
        .collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let k = ((1.0 - nu) * n as f64).ceil() as usize;
    let radius_sq = if k == 0 { 0.0 } else { dists[k - 1] };
    Ok(SvddModel { center, radius_sq, nu })
}
