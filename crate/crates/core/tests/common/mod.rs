//! Independent reference implementations used as test oracles. Nothing in
//! here calls into the crate's covariance or factorization code.
#![allow(dead_code)]

use gpsurr_core::{FlatDataset, KernelFamily, KernelSpec};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Covariance written out directly from the closed forms.
pub fn kernel_ref(k: &KernelSpec, a: &[f64], b: &[f64]) -> f64 {
    let r2: f64 = a
        .iter()
        .zip(b)
        .zip(k.length_scales())
        .map(|((x, y), l)| ((x - y) / l).powi(2))
        .sum();
    let s2 = k.sigma_f() * k.sigma_f();
    match k.rq_alpha() {
        None => s2 * (-0.5 * r2).exp(),
        Some(alpha) => s2 * (1.0 + r2 / (2.0 * alpha)).powf(-alpha),
    }
}

fn rows(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..x.nrows()).map(|i| x.row(i).iter().copied().collect()).collect()
}

fn gram(k: &KernelSpec, x: &DMatrix<f64>, noise: f64) -> DMatrix<f64> {
    let r = rows(x);
    let n = r.len();
    DMatrix::from_fn(n, n, |i, j| kernel_ref(k, &r[i], &r[j]) + if i == j { noise } else { 0.0 })
}

/// Posterior mean and latent variance via an explicit matrix inverse.
pub fn dense_posterior(
    k: &KernelSpec,
    noise: f64,
    x: &DMatrix<f64>,
    y: &[f64],
    xstar: &[f64],
) -> (f64, f64) {
    let inv = gram(k, x, noise).try_inverse().expect("invertible");
    let ks = DVector::from_iterator(x.nrows(), rows(x).iter().map(|r| kernel_ref(k, r, xstar)));
    let yv = DVector::from_column_slice(y);
    let mean = ks.dot(&(&inv * &yv));
    let var = kernel_ref(k, xstar, xstar) - ks.dot(&(&inv * &ks));
    (mean, var)
}

/// `-½ yᵀ A⁻¹ y - ½ log det A - (n/2) log 2π` with `A = K + σn² I`, dense.
pub fn dense_lml(k: &KernelSpec, noise: f64, x: &DMatrix<f64>, y: &[f64]) -> f64 {
    let a = gram(k, x, noise);
    let det = a.determinant();
    let inv = a.try_inverse().expect("invertible");
    let yv = DVector::from_column_slice(y);
    let n = y.len() as f64;
    -0.5 * yv.dot(&(&inv * &yv)) - 0.5 * det.ln() - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
}

pub struct Problem {
    pub kernel: KernelSpec,
    pub noise: f64,
    pub x: DMatrix<f64>,
    pub y: Vec<f64>,
}

/// Random well-conditioned regression problem.
pub fn random_problem(seed: u64, n: usize, d: usize, family: KernelFamily) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ls: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
    let sf = rng.random_range(0.5f64..2.0);
    let kernel = match family {
        KernelFamily::SquaredExponential => KernelSpec::squared_exponential(sf, ls).unwrap(),
        KernelFamily::RationalQuadratic => {
            KernelSpec::rational_quadratic(sf, ls, rng.random_range(0.5..3.0)).unwrap()
        }
    };
    let noise = rng.random_range(0.01f64..0.2);
    let x = DMatrix::from_fn(n, d, |_, _| rng.random_range(-2.0f64..2.0));
    let y = (0..n)
        .map(|i| x.row(i).iter().map(|v| v.sin()).sum::<f64>() + rng.random_range(-0.3..0.3))
        .collect();
    Problem { kernel, noise, x, y }
}

pub fn dataset(x: DMatrix<f64>, y: Vec<f64>) -> FlatDataset {
    let d = x.ncols();
    let n = x.nrows();
    FlatDataset::new(x, y, (0..d).map(|k| format!("x{k}")).collect(), "y", (0..n).collect())
        .unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s < 1e-8 {
        (a - b).abs()
    } else {
        (a - b).abs() / s
    }
}
