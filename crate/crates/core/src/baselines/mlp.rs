//! Three-layer perceptron: two rectified-linear hidden layers and a linear
//! output, trained by mini-batch Adam on squared error.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{FlatDataset, Standardizer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub h1: usize,
    pub h2: usize,
    pub epochs: usize,
    /// Initial Adam step size.
    pub step: f64,
    /// Step at epoch e is `step / (1 + decay · e)`.
    pub decay: f64,
    pub batch: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            h1: 64,
            h2: 64,
            epochs: 200,
            step: 1e-3,
            decay: 0.01,
            batch: 32,
            seed: 0,
        }
    }
}

/// Weights stored `out × in`; activations are `features × batch`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layer_sizes: [usize; 4],
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
    pub standardizer: Standardizer,
    pub feature_names: Vec<String>,
    pub target_name: String,
}

/// Gradients in the same layout as the parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

fn relu(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.map(|v| v.max(0.0))
}

impl MlpModel {
    /// He-initialized weights, zero biases.
    pub fn init(layer_sizes: [usize; 4], rng: &mut ChaCha8Rng) -> Self {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..3 {
            let (fan_in, fan_out) = (layer_sizes[l], layer_sizes[l + 1]);
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).unwrap();
            weights.push(DMatrix::from_fn(fan_out, fan_in, |_, _| normal.sample(rng)));
            biases.push(DVector::zeros(fan_out));
        }
        MlpModel {
            layer_sizes,
            weights,
            biases,
            standardizer: Standardizer::identity(layer_sizes[0]),
            feature_names: (0..layer_sizes[0]).map(|k| format!("x{k}")).collect(),
            target_name: "y".into(),
        }
    }

    fn affine(&self, l: usize, a: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = &self.weights[l] * a;
        for mut col in z.column_iter_mut() {
            col += &self.biases[l];
        }
        z
    }

    /// Output row (1 × batch) for standardized inputs `x` (features × batch).
    pub fn forward(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let a1 = relu(&self.affine(0, x));
        let a2 = relu(&self.affine(1, &a1));
        self.affine(2, &a2)
    }

    /// Mean of `½ (f(x) - y)²` over the batch and its parameter gradients.
    pub fn loss_and_grads(&self, x: &DMatrix<f64>, y: &[f64]) -> (f64, Gradients) {
        let b = x.ncols() as f64;
        let z1 = self.affine(0, x);
        let a1 = relu(&z1);
        let z2 = self.affine(1, &a1);
        let a2 = relu(&z2);
        let out = self.affine(2, &a2);
        let resid = DMatrix::from_fn(1, x.ncols(), |_, j| out[(0, j)] - y[j]);
        let loss = 0.5 * resid.norm_squared() / b;

        let d3 = resid / b;
        let gw3 = &d3 * a2.transpose();
        let gb3 = d3.column_sum();
        let mut d2 = self.weights[2].transpose() * &d3;
        d2.zip_apply(&z2, |g, z| {
            if z <= 0.0 {
                *g = 0.0
            }
        });
        let gw2 = &d2 * a1.transpose();
        let gb2 = d2.column_sum();
        let mut d1 = self.weights[1].transpose() * &d2;
        d1.zip_apply(&z1, |g, z| {
            if z <= 0.0 {
                *g = 0.0
            }
        });
        let gw1 = &d1 * x.transpose();
        let gb1 = d1.column_sum();
        (
            loss,
            Gradients {
                weights: vec![gw1, gw2, gw3],
                biases: vec![gb1, gb2, gb3],
            },
        )
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// All parameters, weights then biases per layer.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            p.extend(w.iter());
            p.extend(b.iter());
        }
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let mut at = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            let n = w.len();
            w.as_mut_slice().copy_from_slice(&p[at..at + n]);
            at += n;
            let m = b.len();
            b.as_mut_slice().copy_from_slice(&p[at..at + m]);
            at += m;
        }
    }

    pub fn fit(data: &FlatDataset, cfg: &MlpConfig) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyInput("training data has no rows".into()));
        }
        if cfg.batch == 0 || cfg.h1 == 0 || cfg.h2 == 0 {
            return Err(Error::InvalidArgument("batch and layer widths must be >= 1".into()));
        }
        let standardizer = Standardizer::fit(data)?;
        let z = standardizer.apply(data);
        let n = z.len();
        let d = z.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut model = MlpModel::init([d, cfg.h1, cfg.h2, 1], &mut rng);
        model.standardizer = standardizer;
        model.feature_names = data.feature_names.clone();
        model.target_name = data.target_name.clone();

        let np = model.n_params();
        let (beta1, beta2, eps) = (0.9f64, 0.999f64, 1e-8);
        let mut m1 = vec![0.0; np];
        let mut m2 = vec![0.0; np];
        let mut t = 0i32;
        let mut order: Vec<usize> = (0..n).collect();
        let xt = z.inputs.transpose();
        for epoch in 0..cfg.epochs {
            order.shuffle(&mut rng);
            let lr = cfg.step / (1.0 + cfg.decay * epoch as f64);
            let mut epoch_loss = 0.0;
            for chunk in order.chunks(cfg.batch) {
                let xb = DMatrix::from_fn(d, chunk.len(), |k, j| xt[(k, chunk[j])]);
                let yb: Vec<f64> = chunk.iter().map(|&i| z.targets[i]).collect();
                let (loss, g) = model.loss_and_grads(&xb, &yb);
                epoch_loss += loss * chunk.len() as f64;
                t += 1;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                let mut p = model.params();
                let grads = g
                    .weights
                    .iter()
                    .zip(&g.biases)
                    .flat_map(|(w, b)| w.iter().chain(b.iter()));
                for (k, gk) in grads.enumerate() {
                    m1[k] = beta1 * m1[k] + (1.0 - beta1) * gk;
                    m2[k] = beta2 * m2[k] + (1.0 - beta2) * gk * gk;
                    p[k] -= lr * (m1[k] / c1) / ((m2[k] / c2).sqrt() + eps);
                }
                model.set_params(&p);
            }
            if !epoch_loss.is_finite() {
                return Err(Error::TrainingDivergence { epoch });
            }
        }
        Ok(model)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.layer_sizes[0] {
            return Err(Error::DimensionMismatch {
                expected: self.layer_sizes[0],
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("prediction input".into()));
        }
        let z = DMatrix::from_column_slice(x.len(), 1, &self.standardizer.apply_row(x));
        Ok(self.standardizer.invert_target(self.forward(&z)[(0, 0)]))
    }
}
