//! Linear soft-margin SVM trained by seeded epoch-based subgradient
//! descent on the primal hinge objective
//! `lambda/2 ||w||^2 + (1/n) sum max(0, 1 - y (w.x + b))`,
//! with step `1/(lambda t)` at update `t` and the averaged iterate
//! returned (Pegasos-style; the bias is not regularized).

use super::{decimal, PredictError, TrainError};
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            lambda: 2e-3,
            epochs: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    #[serde(with = "decimal::vector")]
    pub weights: Vec<f64>,
    #[serde(with = "decimal::scalar")]
    pub bias: f64,
    pub config: SvmConfig,
}

impl LinearSvmModel {
    pub fn score(&self, x: &[f64]) -> Result<f64, PredictError> {
        if x.len() != self.weights.len() {
            return Err(PredictError::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        Ok(dot(&self.weights, x) + self.bias)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The primal objective the trainer minimizes; exposed for tests and
/// diagnostics.
pub fn hinge_objective(w: &[f64], b: f64, x: &[&[f64]], y: &[f64], lambda: f64) -> f64 {
    let reg = 0.5 * lambda * dot(w, w);
    let hinge: f64 = x
        .iter()
        .zip(y)
        .map(|(row, &label)| (1.0 - label * (dot(w, row) + b)).max(0.0))
        .sum();
    reg + hinge / x.len() as f64
}

/// Fisher-Yates shuffle driven by the crate RNG.
fn shuffle(order: &mut [usize], rng: &mut rng::ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
}

pub fn svm_train(x: &[&[f64]], y: &[f64], cfg: &SvmConfig) -> Result<LinearSvmModel, TrainError> {
    if x.len() < 2 {
        return Err(TrainError::TooFewSamples { needed: 2, got: x.len() });
    }
    if x.len() != y.len() {
        return Err(TrainError::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if y.iter().all(|&v| v > 0.0) || y.iter().all(|&v| v <= 0.0) {
        return Err(TrainError::SingleClass);
    }
    let dim = x[0].len();
    for row in x {
        if row.len() != dim {
            return Err(TrainError::DimensionMismatch { expected: dim, got: row.len() });
        }
    }
    if !(cfg.lambda > 0.0) {
        return Err(TrainError::BadConfig(format!("lambda must be > 0, got {}", cfg.lambda)));
    }
    if cfg.epochs == 0 {
        return Err(TrainError::BadConfig("epochs must be >= 1".into()));
    }

    let n = x.len();

    // Precondition: center the features and scale them to unit mean norm
    // so the 1/(lambda t) schedule is well behaved on raw high-dimensional
    // inputs where a large component is common to every sample. Both
    // transforms fold back into the returned weights and bias, so scores
    // on raw features are unchanged.
    let mut mean = vec![0.0f64; dim];
    for row in x {
        for (m, &v) in mean.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mean_norm_sq: f64 = x
        .iter()
        .map(|row| {
            row.iter()
                .zip(&mean)
                .map(|(&v, &m)| (v - m) * (v - m))
                .sum::<f64>()
        })
        .sum::<f64>()
        / n as f64;
    let scale = if mean_norm_sq > 0.0 {
        1.0 / mean_norm_sq.sqrt()
    } else {
        1.0
    };
    let centered: Vec<Vec<f64>> = x
        .iter()
        .map(|row| {
            row.iter()
                .zip(&mean)
                .map(|(&v, &m)| (v - m) * scale)
                .collect()
        })
        .collect();

    let mut w = vec![0.0f64; dim];
    let mut b = 0.0f64;
    let mut w_avg = vec![0.0f64; dim];
    let mut b_avg = 0.0f64;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng::seeded(cfg.seed);
    let mut t = 0u64;

    for _ in 0..cfg.epochs {
        shuffle(&mut order, &mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (cfg.lambda * t as f64);
            let xi = &centered[i];
            let margin = y[i] * (dot(&w, xi) + b);
            let decay = 1.0 - eta * cfg.lambda; // = 1 - 1/t
            if margin < 1.0 {
                let step = eta * y[i];
                for ((wj, &xj), aj) in w.iter_mut().zip(xi).zip(w_avg.iter_mut()) {
                    *wj = *wj * decay + step * xj;
                    *aj += *wj;
                }
                b += step;
            } else {
                for (wj, aj) in w.iter_mut().zip(w_avg.iter_mut()) {
                    *wj *= decay;
                    *aj += *wj;
                }
            }
            b_avg += b;
        }
    }

    let total = t as f64;
    // undo the preconditioning: w_raw = scale * w', b_raw = b' - w_raw . mean
    for aj in &mut w_avg {
        *aj = *aj * scale / total;
    }
    let bias = b_avg / total - dot(&w_avg, &mean);
    Ok(LinearSvmModel {
        weights: w_avg,
        bias,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_line_is_learned() {
        let data: Vec<Vec<f64>> = vec![vec![-2.0], vec![-2.1], vec![2.0], vec![2.2]];
        let x: Vec<&[f64]> = data.iter().map(|r| r.as_slice()).collect();
        let y = [-1.0, -1.0, 1.0, 1.0];
        let model = svm_train(&x, &y, &SvmConfig { lambda: 0.01, epochs: 50, seed: 1 }).unwrap();
        for (row, &label) in data.iter().zip(&y) {
            let s = model.score(row).unwrap();
            assert_eq!(s > 0.0, label > 0.0, "score {s} for label {label}");
        }
    }

    #[test]
    fn objective_not_worse_than_zero_model() {
        let mut state = 0x1234u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let data: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let shift = if i % 2 == 0 { 1.0 } else { -1.0 };
                (0..4).map(|_| next() + shift).collect()
            })
            .collect();
        let x: Vec<&[f64]> = data.iter().map(|r| r.as_slice()).collect();
        let y: Vec<f64> = (0..30).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let cfg = SvmConfig { lambda: 0.01, epochs: 80, seed: 3 };
        let model = svm_train(&x, &y, &cfg).unwrap();
        let obj = hinge_objective(&model.weights, model.bias, &x, &y, cfg.lambda);
        let zero = hinge_objective(&vec![0.0; 4], 0.0, &x, &y, cfg.lambda);
        assert!(obj <= zero, "objective {obj} vs zero-model {zero}");
    }

    /// Slow batch subgradient reference: full-gradient steps on the same
    /// objective, many iterations, no averaging tricks.
    fn batch_reference(x: &[&[f64]], y: &[f64], lambda: f64, iters: usize) -> (Vec<f64>, f64) {
        let dim = x[0].len();
        let n = x.len() as f64;
        let mut w = vec![0.0f64; dim];
        let mut b = 0.0f64;
        for k in 0..iters {
            let mut grad_w: Vec<f64> = w.iter().map(|&wj| lambda * wj).collect();
            let mut grad_b = 0.0;
            for (row, &label) in x.iter().zip(y) {
                let margin = label * (dot(&w, row) + b);
                if margin < 1.0 {
                    for (g, &xj) in grad_w.iter_mut().zip(row.iter()) {
                        *g -= label * xj / n;
                    }
                    grad_b -= label / n;
                }
            }
            let step = 1.0 / (lambda * (k + 1) as f64);
            for (wj, g) in w.iter_mut().zip(&grad_w) {
                *wj -= step * g;
            }
            b -= step * grad_b;
        }
        (w, b)
    }

    fn train_accuracy(w: &[f64], b: f64, x: &[&[f64]], y: &[f64]) -> f64 {
        let correct = x
            .iter()
            .zip(y)
            .filter(|(row, &label)| ((dot(w, row) + b) > 0.0) == (label > 0.0))
            .count();
        correct as f64 / x.len() as f64
    }

    #[test]
    fn matches_batch_reference_on_gaussian_classes() {
        let mut state = 0x9e3779b9u64;
        let mut gauss = move || {
            // sum of uniforms, good enough for a test fixture
            let mut acc = 0.0;
            for _ in 0..12 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                acc += (state >> 11) as f64 / (1u64 << 53) as f64;
            }
            acc - 6.0
        };
        let data: Vec<Vec<f64>> = (0..50)
            .map(|i| {
                let shift = if i < 25 { 1.2 } else { -1.2 };
                (0..5).map(|_| gauss() * 0.8 + shift).collect()
            })
            .collect();
        let x: Vec<&[f64]> = data.iter().map(|r| r.as_slice()).collect();
        let y: Vec<f64> = (0..50).map(|i| if i < 25 { 1.0 } else { -1.0 }).collect();

        let cfg = SvmConfig { lambda: 0.01, epochs: 200, seed: 11 };
        let model = svm_train(&x, &y, &cfg).unwrap();
        let (wr, br) = batch_reference(&x, &y, cfg.lambda, 100_000);

        let acc_model = train_accuracy(&model.weights, model.bias, &x, &y);
        let acc_ref = train_accuracy(&wr, br, &x, &y);
        assert!(
            (acc_model - acc_ref).abs() <= 0.02 + 1e-12,
            "model {acc_model} vs reference {acc_ref}"
        );
    }

    #[test]
    fn rejects_single_class_and_mismatch() {
        let a = vec![1.0];
        let b = vec![2.0];
        let x: Vec<&[f64]> = vec![&a, &b];
        assert!(matches!(
            svm_train(&x, &[1.0, 1.0], &SvmConfig::default()),
            Err(TrainError::SingleClass)
        ));
        let c = vec![1.0, 2.0];
        let x2: Vec<&[f64]> = vec![&a, &c];
        assert!(matches!(
            svm_train(&x2, &[1.0, -1.0], &SvmConfig::default()),
            Err(TrainError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn training_is_deterministic() {
        let data: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![i as f64 * 0.3 - 2.0, (i as f64 * 0.7).sin()])
            .collect();
        let x: Vec<&[f64]> = data.iter().map(|r| r.as_slice()).collect();
        let y: Vec<f64> = (0..12).map(|i| if i < 6 { -1.0 } else { 1.0 }).collect();
        let cfg = SvmConfig { lambda: 0.05, epochs: 40, seed: 9 };
        let a = svm_train(&x, &y, &cfg).unwrap();
        let b = svm_train(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
