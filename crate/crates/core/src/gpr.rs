//! Exact Gaussian-process regression.
//!
//! Training targets and inputs are standardized; the prior mean is zero in
//! standardized space. With `L Lᵀ = K + σn² I` and `α = (K + σn² I)⁻¹ y`:
//!
//! ```text
//! mean(x*)     = k(x*)ᵀ α
//! variance(x*) = k(x*, x*) - ‖L⁻¹ k(x*)‖² + σn²
//! log p(y | X) = -½ yᵀα - Σ log L_ii - (n/2) log 2π
//! ```
//!
//! Reported variances are predictive (they include the noise term).

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DMatrixView, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{sweep_feature_of, unknown, FlatDataset, Standardizer};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

/// Smallest noise variance used in any factorization (standardized units).
pub const NOISE_FLOOR: f64 = 1e-12;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Bounds on log-hyperparameters during optimization.
const LOG_KERNEL_BOUNDS: (f64, f64) = (-7.0, 7.0);
const LOG_ALPHA_BOUNDS: (f64, f64) = (-7.0, 10.0);
/// On log σn; the lower end is the noise floor.
const LOG_NOISE_STD_BOUNDS: (f64, f64) = (-13.815_510_557_964_274, 2.0);

/// Inverse of a lower-triangular matrix by recursive 2×2 blocking, so the
/// bulk of the work runs through matrix products.
fn lower_inverse(l: DMatrixView<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    if n <= 64 {
        let mut inv = DMatrix::identity(n, n);
        l.solve_lower_triangular_mut(&mut inv);
        return inv;
    }
    let h = n / 2;
    let a = lower_inverse(l.view((0, 0), (h, h)));
    let d = lower_inverse(l.view((h, h), (n - h, n - h)));
    let c = -(&d * (l.view((h, 0), (n - h, h)) * &a));
    let mut out = DMatrix::zeros(n, n);
    out.view_mut((0, 0), (h, h)).copy_from(&a);
    out.view_mut((h, h), (n - h, n - h)).copy_from(&d);
    out.view_mut((h, 0), (n - h, h)).copy_from(&c);
    out
}

/// `(L Lᵀ)⁻¹` from the factor.
fn chol_inverse(chol: &Cholesky<f64, Dyn>) -> DMatrix<f64> {
    let li = lower_inverse(chol.l_dirty().lower_triangle().as_view());
    li.transpose() * li
}

/// Adds jitter to the diagonal until the factorization succeeds: first
/// 1e-10·mean(diag K), then ×10 per attempt up to 1e-4·mean(diag K).
fn factorize(k: &DMatrix<f64>, noise_variance: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = k.nrows();
    if k.iter().any(|v| !v.is_finite()) || !noise_variance.is_finite() {
        return Err(Error::Cholesky { jitter: 0.0 });
    }
    let mean_diag = k.diagonal().mean().abs().max(f64::MIN_POSITIVE);
    let max_jitter = 1e-4 * mean_diag;
    let mut jitter = 0.0;
    loop {
        let mut a = k.clone();
        for i in 0..n {
            a[(i, i)] += noise_variance + jitter;
        }
        if let Some(c) = a.cholesky() {
            if c.l_dirty().diagonal().iter().all(|d| *d > 0.0 && d.is_finite()) {
                if jitter > 0.0 {
                    log::debug!("cholesky succeeded with jitter {jitter:e}");
                }
                return Ok((c, noise_variance + jitter));
            }
        }
        let next = if jitter == 0.0 { 1e-10 * mean_diag } else { jitter * 10.0 };
        if next > max_jitter * (1.0 + 1e-9) {
            return Err(Error::Cholesky { jitter });
        }
        jitter = next;
    }
}

/// Log marginal likelihood of `y` and its gradient with respect to
/// `[log σf, log θ..., log α?, log σn]`. Inputs are used as given (no
/// standardization).
pub fn log_marginal_likelihood(
    kernel: &KernelSpec,
    noise_variance: f64,
    x: &DMatrix<f64>,
    y: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let n = x.nrows();
    if n == 0 {
        return Err(Error::EmptyInput("no training rows".into()));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let k = kernel.matrix(x)?;
    let (chol, noise) = factorize(&k, noise_variance.max(NOISE_FLOOR))?;
    let yv = DVector::from_column_slice(y);
    let alpha = chol.solve(&yv);
    let log_det_half: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
    let value = -0.5 * yv.dot(&alpha) - log_det_half - 0.5 * n as f64 * LN_2PI;

    // W = ααᵀ - (K + σn² I)⁻¹
    let mut w = chol_inverse(&chol);
    w.neg_mut();
    w.ger(1.0, &alpha, &alpha, 1.0);
    let mut grad: Vec<f64> = kernel
        .contract_grads(x, &w)?
        .into_iter()
        .map(|g| 0.5 * g)
        .collect();
    // ∂(K + σn² I)/∂log σn = 2σn² I
    grad.push(noise * w.trace());
    Ok((value, grad))
}

/// Settings for the hyperparameter search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptConfig {
    pub max_iters: usize,
    /// Stop once the ∞-norm of the (bound-projected) gradient drops below this.
    pub tolerance: f64,
    /// Random initializations tried in addition to the supplied one.
    pub restarts: usize,
    pub seed: u64,
    /// Optimize hyperparameters on a random subset of this many rows; the
    /// final factorization always uses every row.
    pub hyper_subsample: Option<usize>,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            max_iters: 100,
            tolerance: 1e-4,
            restarts: 3,
            seed: 0,
            hyper_subsample: None,
        }
    }
}

struct Objective<'a> {
    template: &'a KernelSpec,
    x: &'a DMatrix<f64>,
    y: &'a [f64],
}

impl Objective<'_> {
    fn split(&self, p: &[f64]) -> Result<(KernelSpec, f64)> {
        let nk = self.template.n_hyperparameters();
        let kernel = self.template.with_log_params(&p[..nk])?;
        Ok((kernel, (2.0 * p[nk]).exp()))
    }

    /// LML and gradient, or None when the point is numerically unusable.
    fn eval(&self, p: &[f64]) -> Option<(f64, Vec<f64>)> {
        let (kernel, noise) = self.split(p).ok()?;
        let (v, g) = log_marginal_likelihood(&kernel, noise, self.x, self.y).ok()?;
        (v.is_finite() && g.iter().all(|x| x.is_finite())).then_some((v, g))
    }
}

fn bounds(template: &KernelSpec) -> Vec<(f64, f64)> {
    let mut b = vec![LOG_KERNEL_BOUNDS; 1 + template.dim()];
    if template.rq_alpha().is_some() {
        b.push(LOG_ALPHA_BOUNDS);
    }
    b.push(LOG_NOISE_STD_BOUNDS);
    b
}

fn project(p: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, (lo, hi)) in p.iter_mut().zip(bounds) {
        *v = v.clamp(*lo, *hi);
    }
}

/// Gradient with components that push against an active bound removed.
fn projected_gradient(p: &[f64], g: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    p.iter()
        .zip(g)
        .zip(bounds)
        .map(|((v, gi), (lo, hi))| {
            if (*v <= *lo && *gi < 0.0) || (*v >= *hi && *gi > 0.0) {
                0.0
            } else {
                *gi
            }
        })
        .collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Quasi-Newton (BFGS) ascent on the LML with a backtracking Armijo line
/// search, inside box bounds on the log-hyperparameters.
fn ascend(obj: &Objective, start: Vec<f64>, cfg: &OptConfig) -> Result<(Vec<f64>, f64)> {
    let bnds = bounds(obj.template);
    let mut p = start;
    project(&mut p, &bnds);
    let (mut f, mut g) = obj
        .eval(&p)
        .ok_or_else(|| Error::Divergence { state: p.clone() })?;
    let np = p.len();
    let identity = DMatrix::<f64>::identity(np, np);
    let mut h = identity.clone();
    let max_step = 2.0;
    let (mut iters, mut evals) = (0usize, 1usize);
    for _ in 0..cfg.max_iters {
        iters += 1;
        let pg = projected_gradient(&p, &g, &bnds);
        if inf_norm(&pg) < cfg.tolerance {
            break;
        }
        let gv = DVector::from_column_slice(&pg);
        let mut dir = &h * &gv;
        if dir.dot(&gv) <= 0.0 {
            h = identity.clone();
            dir = gv.clone();
        }
        let norm = dir.amax();
        if norm > max_step {
            dir *= max_step / norm;
        }
        let mut accepted = None;
        let mut t = 1.0;
        for _ in 0..20 {
            let mut cand: Vec<f64> = p.iter().zip(dir.iter()).map(|(a, d)| a + t * d).collect();
            project(&mut cand, &bnds);
            let step: Vec<f64> = cand.iter().zip(&p).map(|(a, b)| a - b).collect();
            let gain: f64 = step.iter().zip(&pg).map(|(s, gi)| s * gi).sum();
            evals += 1;
            if let Some((fc, gc)) = obj.eval(&cand) {
                if fc >= f + 1e-4 * gain && fc.is_finite() {
                    accepted = Some((cand, fc, gc, step));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((cand, fc, gc, step)) = accepted else {
            if h == identity {
                break;
            }
            h = identity.clone();
            continue;
        };
        // BFGS update on the minimization problem -LML
        let s = DVector::from_vec(step);
        let yv = DVector::from_iterator(np, gc.iter().zip(&g).map(|(a, b)| -(a - b)));
        let sy = s.dot(&yv);
        if sy > 1e-12 {
            let rho = 1.0 / sy;
            let hy = &h * &yv;
            let yhy = yv.dot(&hy);
            h += (&s * s.transpose()) * (rho * rho * yhy + rho)
                - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        let improved = fc - f;
        p = cand;
        f = fc;
        g = gc;
        // stalled: the accepted step no longer moves the objective
        if improved.abs() < 1e-10 * f.abs().max(1.0) {
            break;
        }
    }
    log::debug!("ascent: {iters} iterations, {evals} evaluations, lml {f:.6}");
    Ok((p, f))
}

fn random_start(template: &KernelSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| rng.random_range(lo.ln()..hi.ln());
    let mut p = Vec::with_capacity(template.n_hyperparameters() + 1);
    p.push(log_uniform(rng, 0.1, 10.0));
    for _ in 0..template.dim() {
        p.push(log_uniform(rng, 0.1, 10.0));
    }
    if template.rq_alpha().is_some() {
        p.push(log_uniform(rng, 0.1, 10.0));
    }
    // σn² log-uniform in [1e-6, 1e-1]; stored as log σn
    p.push(0.5 * log_uniform(rng, 1e-6, 1e-1));
    p
}

/// Maximizes the LML from `init` and from `cfg.restarts` random starts and
/// returns the best hyperparameters. `x` and `y` are used as given.
pub fn optimize_hyperparameters(
    x: &DMatrix<f64>,
    y: &[f64],
    init: &KernelSpec,
    init_noise: f64,
    cfg: &OptConfig,
) -> Result<(KernelSpec, f64, f64)> {
    let obj = Objective { template: init, x, y };
    let mut p0 = init.log_params();
    p0.push(0.5 * init_noise.max(NOISE_FLOOR).ln());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = vec![p0];
    for _ in 0..cfg.restarts {
        starts.push(random_start(init, &mut rng));
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut last_err = None;
    for start in starts {
        match ascend(&obj, start, cfg) {
            Ok((p, f)) => {
                log::debug!("restart finished at lml {f:.6}");
                if best.as_ref().is_none_or(|(_, bf)| f > *bf) {
                    best = Some((p, f));
                }
            }
            Err(e) => {
                log::warn!("hyperparameter start failed: {e}");
                last_err = Some(e);
            }
        }
    }
    let (p, f) = best.ok_or_else(|| last_err.unwrap())?;
    let (kernel, noise) = obj.split(&p)?;
    Ok((kernel, noise, f))
}

/// Posterior mean and predictive variance at one point, natural units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl Prediction {
    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn interval(&self, z: f64) -> (f64, f64) {
        let h = z * self.std();
        (self.mean - h, self.mean + h)
    }
}

/// A predicted curve with a `mean ± z·σ` band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileWithCI {
    pub sweep_feature: String,
    pub sweep_values: Vec<f64>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub ci_lower: Vec<f64>,
    pub ci_upper: Vec<f64>,
    pub z: f64,
}

impl ProfileWithCI {
    pub fn from_predictions(
        sweep_feature: impl Into<String>,
        sweep_values: Vec<f64>,
        preds: &[Prediction],
        z: f64,
    ) -> Self {
        let (ci_lower, ci_upper) = preds.iter().map(|p| p.interval(z)).unzip();
        ProfileWithCI {
            sweep_feature: sweep_feature.into(),
            sweep_values,
            means: preds.iter().map(|p| p.mean).collect(),
            variances: preds.iter().map(|p| p.variance).collect(),
            ci_lower,
            ci_upper,
            z,
        }
    }

    pub fn len(&self) -> usize {
        self.sweep_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sweep_values.is_empty()
    }

    pub fn mean_ci_width(&self) -> f64 {
        let n = self.len() as f64;
        self.ci_upper
            .iter()
            .zip(&self.ci_lower)
            .map(|(u, l)| u - l)
            .sum::<f64>()
            / n
    }
}

/// Trained state. Immutable; prediction is read-only.
#[derive(Debug, Clone, PartialEq)]
pub struct GprModel {
    pub(crate) kernel: KernelSpec,
    pub(crate) noise_variance: f64,
    /// Standardized, n×d.
    pub(crate) train_inputs: DMatrix<f64>,
    /// Standardized.
    pub(crate) train_targets: DVector<f64>,
    /// Lower-triangular `L` with `L Lᵀ = K + σn² I`.
    pub(crate) chol_factor: DMatrix<f64>,
    pub(crate) dual_coeffs: DVector<f64>,
    pub(crate) standardizer: Standardizer,
    pub(crate) feature_names: Vec<String>,
    pub(crate) target_name: String,
    pub(crate) sweep_feature: Option<String>,
}

fn check_finite_data(data: &FlatDataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyInput("training data has no rows".into()));
    }
    if data.inputs.iter().chain(&data.targets).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training data".into()));
    }
    Ok(())
}

impl GprModel {
    /// Conditions a GP with fixed hyperparameters on `data` after applying
    /// `standardizer`. `noise_variance` is in standardized units and is
    /// raised to the floor (plus any jitter the factorization needs).
    pub fn condition(
        data: &FlatDataset,
        kernel: KernelSpec,
        noise_variance: f64,
        standardizer: Standardizer,
    ) -> Result<Self> {
        check_finite_data(data)?;
        if kernel.dim() != data.dim() {
            return Err(Error::DimensionMismatch {
                expected: kernel.dim(),
                got: data.dim(),
            });
        }
        if standardizer.dim() != data.dim() {
            return Err(Error::DimensionMismatch {
                expected: data.dim(),
                got: standardizer.dim(),
            });
        }
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be > 0, got {noise_variance}"
            )));
        }
        let z = standardizer.apply(data);
        let k = kernel.matrix(&z.inputs)?;
        let (chol, noise) = factorize(&k, noise_variance.max(NOISE_FLOOR))?;
        let y = DVector::from_vec(z.targets);
        let dual = chol.solve(&y);
        Ok(GprModel {
            kernel,
            noise_variance: noise,
            train_inputs: z.inputs,
            train_targets: y,
            chol_factor: chol.unpack(),
            dual_coeffs: dual,
            standardizer,
            sweep_feature: sweep_feature_of(&data.feature_names),
            feature_names: data.feature_names.clone(),
            target_name: data.target_name.clone(),
        })
    }

    /// Standardizes `data`, maximizes the marginal likelihood over the
    /// hyperparameters (unless `cfg.max_iters == 0`), and conditions on all
    /// rows at the optimum.
    pub fn fit(
        data: &FlatDataset,
        init: &KernelSpec,
        init_noise: f64,
        cfg: &OptConfig,
    ) -> Result<Self> {
        check_finite_data(data)?;
        if init.dim() != data.dim() {
            return Err(Error::DimensionMismatch {
                expected: init.dim(),
                got: data.dim(),
            });
        }
        let standardizer = Standardizer::fit(data)?;
        let (kernel, noise) = if cfg.max_iters == 0 {
            (init.clone(), init_noise)
        } else {
            let sub = match cfg.hyper_subsample {
                Some(k) if k < data.len() => data.subsample(k, cfg.seed),
                _ => data.clone(),
            };
            let z = standardizer.apply(&sub);
            let (kernel, noise, lml) =
                optimize_hyperparameters(&z.inputs, &z.targets, init, init_noise, cfg)?;
            log::info!(
                "optimized hyperparameters: lml {lml:.4}, sigma_f {:.4}, noise {noise:.3e}, length_scales {:?}",
                kernel.sigma_f(),
                kernel.length_scales()
            );
            (kernel, noise)
        };
        GprModel::condition(data, kernel, noise, standardizer)
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    /// σn², standardized units.
    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn sweep_feature(&self) -> Option<&str> {
        self.sweep_feature.as_deref()
    }

    pub fn n_train(&self) -> usize {
        self.train_targets.len()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn train_inputs(&self) -> &DMatrix<f64> {
        &self.train_inputs
    }

    pub fn train_targets(&self) -> &DVector<f64> {
        &self.train_targets
    }

    pub fn chol_factor(&self) -> &DMatrix<f64> {
        &self.chol_factor
    }

    pub fn dual_coeffs(&self) -> &DVector<f64> {
        &self.dual_coeffs
    }

    /// Prior mean in natural units (the training-target mean).
    pub fn prior_mean(&self) -> f64 {
        self.standardizer.invert_target(0.0)
    }

    /// Prior predictive variance `(σf² + σn²)·s_y²`.
    pub fn prior_variance(&self) -> f64 {
        self.standardizer
            .invert_variance(self.kernel.variance() + self.noise_variance)
    }

    /// LML of the stored (standardized) training targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.n_train() as f64;
        let log_det_half: f64 = self.chol_factor.diagonal().iter().map(|d| d.ln()).sum();
        -0.5 * self.train_targets.dot(&self.dual_coeffs) - log_det_half - 0.5 * n * LN_2PI
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("prediction input".into()));
        }
        Ok(())
    }

    /// Mean and latent (noise-free) variance at standardized points, one per
    /// column of `kstar` (the n×m cross-covariance).
    fn standardized_from_cross(&self, mut kstar: DMatrix<f64>) -> Vec<(f64, f64)> {
        let means = kstar.tr_mul(&self.dual_coeffs);
        self.chol_factor.solve_lower_triangular_unchecked_mut(&mut kstar);
        let s2 = self.kernel.variance();
        kstar
            .column_iter()
            .zip(means.iter())
            .map(|(v, m)| (*m, (s2 - v.norm_squared()).max(0.0)))
            .collect()
    }

    /// Standardized mean and latent variance (no noise term) at points
    /// already in standardized coordinates.
    pub fn predict_standardized(&self, zs: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
        for z in zs {
            self.check_point(z)?;
        }
        let n = self.n_train();
        let mut kstar = DMatrix::zeros(n, zs.len());
        for (j, z) in zs.iter().enumerate() {
            let c = self.kernel.cross(&self.train_inputs, z)?;
            kstar.column_mut(j).copy_from_slice(&c);
        }
        Ok(self.standardized_from_cross(kstar))
    }

    /// Predictions at many natural-unit points.
    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<Prediction>> {
        const CHUNK: usize = 256;
        let zs: Vec<Vec<f64>> = xs
            .iter()
            .map(|x| {
                self.check_point(x)?;
                Ok(self.standardizer.apply_row(x))
            })
            .collect::<Result<_>>()?;
        let parts: Vec<Vec<(f64, f64)>> = zs
            .par_chunks(CHUNK)
            .map(|chunk| self.predict_standardized(chunk))
            .collect::<Result<_>>()?;
        Ok(parts
            .into_iter()
            .flatten()
            .map(|(m, v)| Prediction {
                mean: self.standardizer.invert_target(m),
                variance: self.standardizer.invert_variance(v + self.noise_variance),
            })
            .collect())
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        Ok(self.predict_batch(std::slice::from_ref(&x.to_vec()))?[0])
    }

    /// Predicts along `sweep_grid` with every other feature held at `fixed`.
    pub fn predict_profile(
        &self,
        fixed: &BTreeMap<String, f64>,
        sweep_feature: &str,
        sweep_grid: &[f64],
        z: f64,
    ) -> Result<ProfileWithCI> {
        let rows = profile_rows(&self.feature_names, fixed, sweep_feature, sweep_grid)?;
        if !(z >= 0.0 && z.is_finite()) {
            return Err(Error::InvalidArgument(format!("z must be >= 0, got {z}")));
        }
        let preds = self.predict_batch(&rows)?;
        Ok(ProfileWithCI::from_predictions(
            sweep_feature,
            sweep_grid.to_vec(),
            &preds,
            z,
        ))
    }
}

/// `count` evenly spaced values from `start` to `stop` inclusive; a single
/// point sits at `start`.
pub fn linspace(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::EmptyInput("sweep count is 0".into()));
    }
    if !(start.is_finite() && stop.is_finite()) {
        return Err(Error::NonFinite("sweep range".into()));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    let mut v: Vec<f64> = (0..count).map(|i| start + step * i as f64).collect();
    v[count - 1] = stop;
    Ok(v)
}

/// Builds one input row per grid value. `fixed` must name every feature
/// except the swept one; a value for the swept feature is ignored.
pub fn profile_rows(
    feature_names: &[String],
    fixed: &BTreeMap<String, f64>,
    sweep_feature: &str,
    sweep_grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let names = || feature_names.iter().map(String::as_str);
    let sweep_idx = feature_names
        .iter()
        .position(|f| f == sweep_feature)
        .ok_or_else(|| unknown(sweep_feature, names()))?;
    if sweep_grid.is_empty() {
        return Err(Error::EmptyInput("sweep grid is empty".into()));
    }
    if sweep_grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sweep grid".into()));
    }
    if let Some(extra) = fixed.keys().find(|k| !feature_names.contains(k)) {
        return Err(unknown(extra, names()));
    }
    let missing: Vec<String> = feature_names
        .iter()
        .enumerate()
        .filter(|(i, f)| *i != sweep_idx && !fixed.contains_key(*f))
        .map(|(_, f)| f.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingFeatures {
            missing,
            expected: feature_names.to_vec(),
        });
    }
    let mut base: Vec<f64> = feature_names
        .iter()
        .map(|f| fixed.get(f).copied().unwrap_or(0.0))
        .collect();
    if let Some((i, _)) = base
        .iter()
        .enumerate()
        .find(|(i, v)| *i != sweep_idx && !v.is_finite())
    {
        return Err(Error::NonFinite(feature_names[i].clone()));
    }
    Ok(sweep_grid
        .iter()
        .map(|&s| {
            base[sweep_idx] = s;
            base.clone()
        })
        .collect())
}
