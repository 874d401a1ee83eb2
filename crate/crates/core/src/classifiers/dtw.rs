//! Dynamic-time-warping template classifier.
//!
//! The template is the elementwise mean of the positive training
//! sequences; the decision threshold is the largest DTW distance from any
//! training positive to that template. A test sequence scores
//! `threshold - distance`, so anything warping further from the template
//! than the worst training positive is called Bad.

use super::{decimal, PredictError, TrainError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtwModel {
    #[serde(with = "decimal::matrix")]
    pub template: Vec<Vec<f64>>,
    #[serde(with = "decimal::scalar")]
    pub threshold: f64,
    pub frame_dim: usize,
}

impl DtwModel {
    pub fn score(&self, seq: &[Vec<f64>]) -> Result<f64, PredictError> {
        if seq.is_empty() {
            return Err(PredictError::EmptySequence);
        }
        if seq[0].len() != self.frame_dim {
            return Err(PredictError::DimensionMismatch {
                expected: self.frame_dim,
                got: seq[0].len(),
            });
        }
        let dist = dtw_distance(seq, &self.template).map_err(|_| PredictError::EmptySequence)?;
        Ok(self.threshold - dist)
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// DTW alignment cost with per-cell Euclidean frame distance and steps
/// {(1,0), (0,1), (1,1)}; `D(0,0) = cost(0,0)`.
pub fn dtw_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64, TrainError> {
    if a.is_empty() || b.is_empty() {
        return Err(TrainError::EmptySequence);
    }
    let d = a[0].len();
    for row in a.iter().chain(b.iter()) {
        if row.len() != d {
            return Err(TrainError::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
    }
    let cols = b.len();
    // rolling single-row DP
    let mut prev = vec![0.0f64; cols];
    let mut curr = vec![0.0f64; cols];
    for (i, fa) in a.iter().enumerate() {
        for (j, fb) in b.iter().enumerate() {
            let cost = euclidean(fa, fb);
            curr[j] = if i == 0 && j == 0 {
                cost
            } else if i == 0 {
                cost + curr[j - 1]
            } else if j == 0 {
                cost + prev[j]
            } else {
                cost + prev[j].min(curr[j - 1]).min(prev[j - 1])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[cols - 1])
}

/// Builds the template and threshold from positive training sequences.
/// All sequences must share one length (the preprocessed frame count) and
/// one frame dimension.
pub fn dtw_train(positives: &[&[Vec<f64>]]) -> Result<DtwModel, TrainError> {
    if positives.is_empty() {
        return Err(TrainError::EmptyPositives);
    }
    let frames = positives[0].len();
    if frames == 0 {
        return Err(TrainError::EmptySequence);
    }
    let dim = positives[0][0].len();
    for seq in positives {
        if seq.len() != frames {
            return Err(TrainError::DimensionMismatch {
                expected: frames,
                got: seq.len(),
            });
        }
        for row in seq.iter() {
            if row.len() != dim {
                return Err(TrainError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
        }
    }

    let inv = 1.0 / positives.len() as f64;
    let mut template = vec![vec![0.0f64; dim]; frames];
    for seq in positives {
        for (k, frame) in seq.iter().enumerate() {
            for (t, &v) in template[k].iter_mut().zip(frame.iter()) {
                *t += v;
            }
        }
    }
    for frame in &mut template {
        for v in frame.iter_mut() {
            *v *= inv;
        }
    }

    let mut threshold = 0.0f64;
    for seq in positives {
        threshold = threshold.max(dtw_distance(seq, &template)?);
    }
    Ok(DtwModel {
        template,
        threshold,
        frame_dim: dim,
    })
}
