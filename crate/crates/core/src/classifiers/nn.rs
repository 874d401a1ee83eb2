//! Fully connected feedforward network with sigmoid units throughout,
//! trained with binary cross-entropy by seeded mini-batch gradient
//! descent.
//!
//! Weights start uniform in +/- sqrt(6 / (fan_in + fan_out)), biases at
//! zero. The decision score is the logit of the output unit (its
//! pre-activation), so output 0.5 sits exactly on the score-zero
//! boundary shared by all classifier families.

use super::{decimal, PredictError, TrainError};
use crate::rng;
use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnConfig {
    pub hidden_sizes: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for NnConfig {
    fn default() -> Self {
        NnConfig {
            hidden_sizes: vec![500],
            learning_rate: 0.3,
            epochs: 4,
            batch_size: 20,
            seed: 0,
        }
    }
}

impl NnConfig {
    /// Two-hidden-layer preset.
    pub fn multilayer() -> NnConfig {
        NnConfig {
            hidden_sizes: vec![500, 100],
            ..NnConfig::default()
        }
    }

    fn validate(&self) -> Result<(), TrainError> {
        if self.hidden_sizes.iter().any(|&h| h == 0) {
            return Err(TrainError::BadConfig("hidden layer sizes must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(TrainError::BadConfig(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(TrainError::BadConfig("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnLayer {
    /// Weight matrix, `out x in`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NnModelRepr", into = "NnModelRepr")]
pub struct NnModel {
    pub layers: Vec<NnLayer>,
    pub config: NnConfig,
    pub input_dim: usize,
}

// Serialized form: weight rows as decimal text.
#[derive(Serialize, Deserialize)]
struct NnLayerRepr {
    #[serde(with = "decimal::matrix")]
    weights: Vec<Vec<f64>>,
    #[serde(with = "decimal::vector")]
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NnModelRepr {
    layers: Vec<NnLayerRepr>,
    config: NnConfig,
    input_dim: usize,
}

impl From<NnModel> for NnModelRepr {
    fn from(m: NnModel) -> Self {
        NnModelRepr {
            layers: m
                .layers
                .iter()
                .map(|l| NnLayerRepr {
                    weights: l.weights.rows().into_iter().map(|r| r.to_vec()).collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
            config: m.config,
            input_dim: m.input_dim,
        }
    }
}

impl TryFrom<NnModelRepr> for NnModel {
    type Error = String;

    fn try_from(r: NnModelRepr) -> Result<Self, String> {
        let mut layers = Vec::with_capacity(r.layers.len());
        for l in r.layers {
            let rows = l.weights.len();
            let cols = l.weights.first().map(|r| r.len()).unwrap_or(0);
            if l.weights.iter().any(|row| row.len() != cols) || l.bias.len() != rows {
                return Err("ragged weight matrix".into());
            }
            let flat: Vec<f64> = l.weights.into_iter().flatten().collect();
            let weights = Array2::from_shape_vec((rows, cols), flat).map_err(|e| e.to_string())?;
            layers.push(NnLayer {
                weights,
                bias: Array1::from_vec(l.bias),
            });
        }
        Ok(NnModel {
            layers,
            config: r.config,
            input_dim: 0,
        }
        .with_inferred_input_dim())
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl NnModel {
    fn with_inferred_input_dim(mut self) -> NnModel {
        self.input_dim = self.layers.first().map(|l| l.weights.ncols()).unwrap_or(0);
        self
    }

    /// Total number of weights and biases.
    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Logit of the output unit for a single input.
    pub fn score(&self, x: &[f64]) -> Result<f64, PredictError> {
        if x.len() != self.input_dim {
            return Err(PredictError::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let mut a: Vec<f64> = x.to_vec();
        for (li, layer) in self.layers.iter().enumerate() {
            let last = li + 1 == self.layers.len();
            let mut z: Vec<f64> = layer
                .weights
                .rows()
                .into_iter()
                .zip(layer.bias.iter())
                .map(|(row, &b)| row.iter().zip(&a).map(|(w, v)| w * v).sum::<f64>() + b)
                .collect();
            if last {
                return Ok(z[0]);
            }
            for v in &mut z {
                *v = sigmoid(*v);
            }
            a = z;
        }
        unreachable!("model has at least one layer")
    }

    /// All layer activations for a batch, input first.
    fn forward_batch(&self, x: &Array2<f64>) -> Vec<Array2<f64>> {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.clone());
        for layer in &self.layers {
            let z = activations.last().unwrap().dot(&layer.weights.t()) + &layer.bias;
            activations.push(z.mapv(sigmoid));
        }
        activations
    }
}

/// Mean binary cross-entropy over a batch plus gradients for every layer,
/// by backpropagation. `targets` uses 1.0 for Good and 0.0 for Bad.
pub fn loss_and_gradients(
    model: &NnModel,
    x: &Array2<f64>,
    targets: &Array1<f64>,
) -> (f64, Vec<(Array2<f64>, Array1<f64>)>) {
    let m = x.nrows() as f64;
    let activations = model.forward_batch(x);
    let output = activations.last().unwrap().column(0).to_owned();

    // log arguments floored so a saturated unit reports a large finite
    // loss; the analytic gradient (p - y) is exact either way
    let loss = output
        .iter()
        .zip(targets)
        .map(|(&p, &y)| {
            -(y * p.max(1e-300).ln() + (1.0 - y) * (1.0 - p).max(1e-300).ln())
        })
        .sum::<f64>()
        / m;

    // dL/dz at the output for sigmoid + BCE is (p - y), scaled for the mean
    let mut dz = {
        let diff = (&output - targets).mapv(|v| v / m);
        diff.insert_axis(Axis(1))
    };

    let mut grads: Vec<(Array2<f64>, Array1<f64>)> = Vec::with_capacity(model.layers.len());
    for (li, layer) in model.layers.iter().enumerate().rev() {
        let grad_w = dz.t().dot(&activations[li]);
        let grad_b = dz.sum_axis(Axis(0));
        if li > 0 {
            let da = dz.dot(&layer.weights);
            dz = da * &activations[li].mapv(|a| a * (1.0 - a));
        }
        grads.push((grad_w, grad_b));
    }
    grads.reverse();
    (loss, grads)
}

fn init_model(input_dim: usize, cfg: &NnConfig) -> NnModel {
    let mut rng = rng::seeded(cfg.seed);
    let mut sizes = vec![input_dim];
    sizes.extend_from_slice(&cfg.hidden_sizes);
    sizes.push(1);
    let layers = sizes
        .windows(2)
        .map(|io| {
            let (fan_in, fan_out) = (io[0], io[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let weights = Array2::from_shape_fn((fan_out, fan_in), |_| {
                (2.0 * rng.gen::<f64>() - 1.0) * limit
            });
            NnLayer {
                weights,
                bias: Array1::zeros(fan_out),
            }
        })
        .collect();
    NnModel {
        layers,
        config: cfg.clone(),
        input_dim,
    }
}

pub fn nn_train(x: &[&[f64]], y: &[f64], cfg: &NnConfig) -> Result<NnModel, TrainError> {
    cfg.validate()?;
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

    let mut model = init_model(dim, cfg);
    if cfg.epochs == 0 {
        return Ok(model);
    }

    let n = x.len();

    // Standardize inputs per feature for training; the affine transform is
    // folded into the first layer afterwards, so the returned model scores
    // raw features. Constant features get scale 0 and contribute nothing.
    let mut mean = vec![0.0f64; dim];
    for row in x {
        for (m, &v) in mean.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut scale = vec![0.0f64; dim];
    for row in x {
        for ((s, &v), &m) in scale.iter_mut().zip(row.iter()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut scale {
        let sd = (*s / n as f64).sqrt();
        *s = if sd > 1e-9 { 1.0 / sd } else { 0.0 };
    }
    let standardized: Vec<Vec<f64>> = x
        .iter()
        .map(|row| {
            row.iter()
                .zip(&mean)
                .zip(&scale)
                .map(|((&v, &m), &s)| (v - m) * s)
                .collect()
        })
        .collect();

    let targets_all: Vec<f64> = y.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng::seeded(cfg.seed.wrapping_add(1));

    for epoch in 0..cfg.epochs {
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for chunk in order.chunks(cfg.batch_size) {
            let mut batch = Array2::zeros((chunk.len(), dim));
            let mut targets = Array1::zeros(chunk.len());
            for (bi, &si) in chunk.iter().enumerate() {
                batch
                    .row_mut(bi)
                    .assign(&ndarray::ArrayView1::from(standardized[si].as_slice()));
                targets[bi] = targets_all[si];
            }
            let (loss, grads) = loss_and_gradients(&model, &batch, &targets);
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch });
            }
            for (layer, (grad_w, grad_b)) in model.layers.iter_mut().zip(grads) {
                layer.weights.scaled_add(-cfg.learning_rate, &grad_w);
                layer.bias.scaled_add(-cfg.learning_rate, &grad_b);
            }
        }
    }

    // fold standardization into the first layer:
    // W (x - mean) * scale + b  ->  (W * scale) x + (b - W * scale . mean)
    {
        let first = &mut model.layers[0];
        let mut shift = vec![0.0f64; first.weights.nrows()];
        for (r, mut row) in first.weights.rows_mut().into_iter().enumerate() {
            let mut dot_mean = 0.0;
            for ((w, &s), &m) in row.iter_mut().zip(&scale).zip(&mean) {
                *w *= s;
                dot_mean += *w * m;
            }
            shift[r] = dot_mean;
        }
        for (b, d) in first.bias.iter_mut().zip(shift) {
            *b -= d;
        }
    }
    Ok(model)
}

/// Mean BCE loss of a model on a labeled set; used by tests and training
/// diagnostics.
pub fn mean_loss(model: &NnModel, x: &[&[f64]], y: &[f64]) -> f64 {
    let dim = x[0].len();
    let mut batch = Array2::zeros((x.len(), dim));
    for (bi, row) in x.iter().enumerate() {
        batch.row_mut(bi).assign(&ndarray::ArrayView1::from(*row));
    }
    let targets: Array1<f64> =
        Array1::from_iter(y.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }));
    loss_and_gradients(model, &batch, &targets).0
}
