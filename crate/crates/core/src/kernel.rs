//! Stationary covariance functions with per-feature (ARD) length scales.
//!
//! Two families are provided:
//!
//! * squared exponential: `k(x, x') = σf² exp(-r²/2)`
//! * rational quadratic:  `k(x, x') = σf² (1 + r²/(2α))^(-α)`
//!
//! where `r² = Σ_k ((x_k - x'_k)/θ_k)²`. Hyperparameter gradients are taken
//! with respect to the logarithm of each hyperparameter, in the order
//! `[σf, θ_1..θ_d, α?]`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Correlations below this are treated as exactly zero. The change is below
/// double resolution relative to the diagonal, and it keeps factorizations
/// free of subnormal intermediates, which are very slow on common CPUs.
pub const CORRELATION_CUTOFF: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    #[serde(rename = "se")]
    SquaredExponential,
    #[serde(rename = "rq")]
    RationalQuadratic,
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "se" | "rbf" | "squared_exponential" => Ok(KernelFamily::SquaredExponential),
            "rq" | "rational_quadratic" => Ok(KernelFamily::RationalQuadratic),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel family `{other}` (expected se or rq)"
            ))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawKernelSpec {
    family: KernelFamily,
    sigma_f: f64,
    length_scales: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rq_alpha: Option<f64>,
}

/// Kernel family plus hyperparameters. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernelSpec", into = "RawKernelSpec")]
pub struct KernelSpec {
    family: KernelFamily,
    sigma_f: f64,
    length_scales: Vec<f64>,
    rq_alpha: Option<f64>,
}

impl TryFrom<RawKernelSpec> for KernelSpec {
    type Error = Error;

    fn try_from(raw: RawKernelSpec) -> Result<Self> {
        KernelSpec::new(raw.family, raw.sigma_f, raw.length_scales, raw.rq_alpha)
    }
}

impl From<KernelSpec> for RawKernelSpec {
    fn from(spec: KernelSpec) -> Self {
        RawKernelSpec {
            family: spec.family,
            sigma_f: spec.sigma_f,
            length_scales: spec.length_scales,
            rq_alpha: spec.rq_alpha,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

impl KernelSpec {
    pub fn new(
        family: KernelFamily,
        sigma_f: f64,
        length_scales: Vec<f64>,
        rq_alpha: Option<f64>,
    ) -> Result<Self> {
        positive("sigma_f", sigma_f)?;
        if length_scales.is_empty() {
            return Err(Error::InvalidArgument(
                "length_scales must not be empty".into(),
            ));
        }
        for &l in &length_scales {
            positive("length_scale", l)?;
        }
        let rq_alpha = match (family, rq_alpha) {
            (KernelFamily::SquaredExponential, None) => None,
            (KernelFamily::SquaredExponential, Some(_)) => {
                return Err(Error::InvalidArgument(
                    "rq_alpha is only valid for the rational quadratic family".into(),
                ))
            }
            (KernelFamily::RationalQuadratic, Some(a)) => {
                positive("rq_alpha", a)?;
                Some(a)
            }
            (KernelFamily::RationalQuadratic, None) => {
                return Err(Error::InvalidArgument(
                    "rational quadratic kernel requires rq_alpha".into(),
                ))
            }
        };
        Ok(KernelSpec {
            family,
            sigma_f,
            length_scales,
            rq_alpha,
        })
    }

    pub fn squared_exponential(sigma_f: f64, length_scales: Vec<f64>) -> Result<Self> {
        Self::new(KernelFamily::SquaredExponential, sigma_f, length_scales, None)
    }

    pub fn rational_quadratic(sigma_f: f64, length_scales: Vec<f64>, alpha: f64) -> Result<Self> {
        Self::new(
            KernelFamily::RationalQuadratic,
            sigma_f,
            length_scales,
            Some(alpha),
        )
    }

    /// Unit amplitude and unit length scales over `dim` features.
    pub fn default_for(family: KernelFamily, dim: usize) -> Self {
        let alpha = match family {
            KernelFamily::SquaredExponential => None,
            KernelFamily::RationalQuadratic => Some(1.0),
        };
        KernelSpec {
            family,
            sigma_f: 1.0,
            length_scales: vec![1.0; dim.max(1)],
            rq_alpha: alpha,
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn sigma_f(&self) -> f64 {
        self.sigma_f
    }

    pub fn length_scales(&self) -> &[f64] {
        &self.length_scales
    }

    pub fn rq_alpha(&self) -> Option<f64> {
        self.rq_alpha
    }

    pub fn dim(&self) -> usize {
        self.length_scales.len()
    }

    /// Prior variance `k(x, x) = σf²`.
    pub fn variance(&self) -> f64 {
        self.sigma_f * self.sigma_f
    }

    pub fn n_hyperparameters(&self) -> usize {
        1 + self.length_scales.len() + usize::from(self.rq_alpha.is_some())
    }

    /// `[log σf, log θ..., log α?]`
    pub fn log_params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_hyperparameters());
        p.push(self.sigma_f.ln());
        p.extend(self.length_scales.iter().map(|l| l.ln()));
        if let Some(a) = self.rq_alpha {
            p.push(a.ln());
        }
        p
    }

    /// Same family and dimensionality, hyperparameters taken from `log_params`.
    pub fn with_log_params(&self, log_params: &[f64]) -> Result<Self> {
        if log_params.len() != self.n_hyperparameters() {
            return Err(Error::DimensionMismatch {
                expected: self.n_hyperparameters(),
                got: log_params.len(),
            });
        }
        let d = self.length_scales.len();
        let alpha = self.rq_alpha.map(|_| log_params[1 + d].exp());
        KernelSpec::new(
            self.family,
            log_params[0].exp(),
            log_params[1..1 + d].iter().map(|v| v.exp()).collect(),
            alpha,
        )
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            })
        } else {
            Ok(())
        }
    }

    /// Kernel value as a function of the scaled squared distance `r²`.
    #[inline]
    fn from_sq_dist(&self, r2: f64) -> f64 {
        let s2 = self.variance();
        let c = match self.family {
            KernelFamily::SquaredExponential => (-0.5 * r2).exp(),
            KernelFamily::RationalQuadratic => {
                let a = self.rq_alpha.unwrap_or(1.0);
                (1.0 + r2 / (2.0 * a)).powf(-a)
            }
        };
        if c < CORRELATION_CUTOFF {
            0.0
        } else {
            s2 * c
        }
    }

    #[inline]
    fn sq_dist(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .zip(&self.length_scales)
            .map(|((a, b), l)| {
                let t = (a - b) / l;
                t * t
            })
            .sum()
    }

    /// `K(x, x2)`.
    pub fn eval(&self, x: &[f64], x2: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        if x2.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: x2.len(),
            });
        }
        Ok(self.from_sq_dist(self.sq_dist(x, x2)))
    }

    /// Rows of `x` divided by the length scales, row-major.
    fn scaled_rows(&self, x: &DMatrix<f64>) -> Vec<f64> {
        let (n, d) = x.shape();
        let mut out = vec![0.0; n * d];
        for i in 0..n {
            for k in 0..d {
                out[i * d + k] = x[(i, k)] / self.length_scales[k];
            }
        }
        out
    }

    /// Gram matrix over the rows of `x`. Each pair is evaluated once and
    /// mirrored, so the result is exactly symmetric.
    pub fn matrix(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let (n, d) = x.shape();
        if n == 0 {
            return Err(Error::EmptyInput("kernel matrix needs at least one row".into()));
        }
        self.check_dim(d)?;
        let z = self.scaled_rows(x);
        let diag = self.variance();
        // lower triangle, row by row
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let zi = &z[i * d..(i + 1) * d];
                (0..i)
                    .map(|j| {
                        let zj = &z[j * d..(j + 1) * d];
                        let r2: f64 = zi.iter().zip(zj).map(|(a, b)| (a - b) * (a - b)).sum();
                        self.from_sq_dist(r2)
                    })
                    .collect()
            })
            .collect();
        let mut k = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
            k[(i, i)] = diag;
        }
        Ok(k)
    }

    /// Cross-covariance `k(x*)` between `xstar` and every row of `x`.
    pub fn cross(&self, x: &DMatrix<f64>, xstar: &[f64]) -> Result<Vec<f64>> {
        let d = x.ncols();
        self.check_dim(d)?;
        self.check_dim(xstar.len())?;
        let zs: Vec<f64> = xstar
            .iter()
            .zip(&self.length_scales)
            .map(|(v, l)| v / l)
            .collect();
        Ok((0..x.nrows())
            .map(|j| {
                let r2: f64 = (0..d)
                    .map(|k| {
                        let t = x[(j, k)] / self.length_scales[k] - zs[k];
                        t * t
                    })
                    .sum();
                self.from_sq_dist(r2)
            })
            .collect())
    }

    /// `∂K/∂log h` for every hyperparameter `h`, in `log_params` order.
    pub fn matrix_grads(&self, x: &DMatrix<f64>) -> Result<Vec<DMatrix<f64>>> {
        let (n, d) = x.shape();
        if n == 0 {
            return Err(Error::EmptyInput("kernel matrix needs at least one row".into()));
        }
        self.check_dim(d)?;
        let z = self.scaled_rows(x);
        let np = self.n_hyperparameters();
        let mut grads = vec![DMatrix::zeros(n, n); np];
        let s2 = self.variance();
        let mut comp = vec![0.0; d];
        for i in 0..n {
            for j in 0..=i {
                let mut r2 = 0.0;
                for k in 0..d {
                    let t = z[i * d + k] - z[j * d + k];
                    comp[k] = t * t;
                    r2 += comp[k];
                }
                let kv = self.from_sq_dist(r2);
                // dK/dlog θ_k = g · (Δ_k/θ_k)²
                let (g, dalpha) = match self.family {
                    KernelFamily::SquaredExponential => (kv, None),
                    KernelFamily::RationalQuadratic => {
                        let a = self.rq_alpha.unwrap_or(1.0);
                        let u = r2 / (2.0 * a);
                        let base = 1.0 + u;
                        let g = s2 * base.powf(-a - 1.0);
                        let da = kv * a * (u / base - base.ln());
                        (g, Some(da))
                    }
                };
                let mut set = |p: usize, v: f64| {
                    grads[p][(i, j)] = v;
                    grads[p][(j, i)] = v;
                };
                set(0, 2.0 * kv);
                for k in 0..d {
                    set(1 + k, g * comp[k]);
                }
                if let Some(da) = dalpha {
                    set(1 + d, da);
                }
            }
        }
        Ok(grads)
    }

    /// `Σ_ij W_ij ∂K_ij/∂log h` for every hyperparameter, without forming
    /// the gradient matrices. `w` must be symmetric.
    pub fn contract_grads(&self, x: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<Vec<f64>> {
        let (n, d) = x.shape();
        self.check_dim(d)?;
        if w.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: w.nrows(),
            });
        }
        let z = self.scaled_rows(x);
        let np = self.n_hyperparameters();
        let s2 = self.variance();
        let partial: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = vec![0.0; np];
                let zi = &z[i * d..(i + 1) * d];
                for j in 0..=i {
                    // off-diagonal pairs appear twice in the full sum
                    let wij = if i == j { w[(i, j)] } else { 2.0 * w[(i, j)] };
                    if wij == 0.0 {
                        continue;
                    }
                    let zj = &z[j * d..(j + 1) * d];
                    let r2: f64 = zi.iter().zip(zj).map(|(a, b)| (a - b) * (a - b)).sum();
                    let kv = self.from_sq_dist(r2);
                    acc[0] += wij * 2.0 * kv;
                    let g = match self.family {
                        KernelFamily::SquaredExponential => kv,
                        KernelFamily::RationalQuadratic => {
                            let a = self.rq_alpha.unwrap_or(1.0);
                            let u = r2 / (2.0 * a);
                            let base = 1.0 + u;
                            acc[1 + d] += wij * kv * a * (u / base - base.ln());
                            s2 * base.powf(-a - 1.0)
                        }
                    };
                    let gw = g * wij;
                    for k in 0..d {
                        let t = zi[k] - zj[k];
                        acc[1 + k] += gw * t * t;
                    }
                }
                acc
            })
            .collect();
        let mut out = vec![0.0; np];
        for acc in partial {
            for (o, a) in out.iter_mut().zip(acc) {
                *o += a;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, d, |_, _| rng.random_range(-2.0..2.0))
    }

    fn row(x: &DMatrix<f64>, i: usize) -> Vec<f64> {
        x.row(i).iter().copied().collect()
    }

    fn families() -> Vec<KernelSpec> {
        vec![
            KernelSpec::squared_exponential(1.3, vec![0.7, 1.9]).unwrap(),
            KernelSpec::rational_quadratic(0.8, vec![1.1, 0.4], 2.5).unwrap(),
        ]
    }

    #[test]
    fn se_point_values() {
        let k = KernelSpec::squared_exponential(1.0, vec![1.0]).unwrap();
        assert_eq!(k.eval(&[0.3], &[0.3]).unwrap(), 1.0);
        assert_relative_eq!(k.eval(&[0.0], &[1.0]).unwrap(), (-0.5f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(k.eval(&[0.0], &[1.0]).unwrap(), 0.606531, epsilon = 1e-6);
    }

    #[test]
    fn rq_point_value() {
        let k = KernelSpec::rational_quadratic(2.0, vec![1.0], 1.0).unwrap();
        assert_relative_eq!(k.eval(&[0.0], &[1.0]).unwrap(), 4.0 / 1.5, epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch_names_lengths() {
        let k = KernelSpec::squared_exponential(1.0, vec![1.0, 1.0]).unwrap();
        let err = k.eval(&[0.0], &[1.0]).unwrap_err();
        assert!(err.to_string().contains("expected 2, got 1"), "{err}");
        assert!(k.eval(&[0.0, 1.0], &[1.0]).is_err());
        let x = DMatrix::zeros(3, 3);
        assert!(k.matrix(&x).is_err());
        assert!(k.matrix_grads(&x).is_err());
    }

    #[test]
    fn invalid_hyperparameters_rejected() {
        assert!(KernelSpec::squared_exponential(0.0, vec![1.0]).is_err());
        assert!(KernelSpec::squared_exponential(1.0, vec![-1.0]).is_err());
        assert!(KernelSpec::squared_exponential(1.0, vec![]).is_err());
        assert!(KernelSpec::rational_quadratic(1.0, vec![1.0], 0.0).is_err());
        assert!(KernelSpec::new(KernelFamily::RationalQuadratic, 1.0, vec![1.0], None).is_err());
        assert!(
            KernelSpec::new(KernelFamily::SquaredExponential, 1.0, vec![1.0], Some(1.0)).is_err()
        );
    }

    #[test]
    fn json_shape() {
        let k = KernelSpec::rational_quadratic(2.0, vec![1.0, 3.0], 0.5).unwrap();
        let v: serde_json::Value = serde_json::to_value(&k).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"family": "rq", "sigma_f": 2.0, "length_scales": [1.0, 3.0], "rq_alpha": 0.5})
        );
        let se = KernelSpec::squared_exponential(1.0, vec![1.0]).unwrap();
        assert_eq!(
            serde_json::to_string(&se).unwrap(),
            r#"{"family":"se","sigma_f":1.0,"length_scales":[1.0]}"#
        );
        let back: KernelSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back, k);
        let bad = serde_json::json!({"family": "se", "sigma_f": -1.0, "length_scales": [1.0]});
        assert!(serde_json::from_value::<KernelSpec>(bad).is_err());
    }

    #[test]
    fn matrix_small_cases() {
        let k = KernelSpec::squared_exponential(1.5, vec![1.0]).unwrap();
        let one = DMatrix::from_row_slice(1, 1, &[0.4]);
        assert_eq!(k.matrix(&one).unwrap(), DMatrix::from_element(1, 1, 2.25));
        let two = DMatrix::from_row_slice(2, 1, &[0.4, 0.4]);
        assert_eq!(k.matrix(&two).unwrap(), DMatrix::from_element(2, 2, 2.25));
    }

    #[test]
    fn matrix_and_cross_match_pairwise_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in [
            KernelSpec::squared_exponential(1.3, vec![0.7, 1.9, 0.5]).unwrap(),
            KernelSpec::rational_quadratic(0.8, vec![1.1, 0.4, 2.0], 2.5).unwrap(),
        ] {
            let x = random_matrix(&mut rng, 5, 3);
            let k = spec.matrix(&x).unwrap();
            for i in 0..5 {
                for j in 0..5 {
                    let brute = spec.eval(&row(&x, i), &row(&x, j)).unwrap();
                    assert!((k[(i, j)] - brute).abs() < 1e-12);
                }
                assert_eq!(k[(i, i)], spec.variance());
            }
            assert_eq!(k, k.transpose());

            let xs: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let c = spec.cross(&x, &xs).unwrap();
            for j in 0..5 {
                assert!((c[j] - spec.eval(&xs, &row(&x, j)).unwrap()).abs() < 1e-12);
            }
            let on_row = spec.cross(&x, &row(&x, 2)).unwrap();
            assert!((on_row[2] - spec.variance()).abs() < 1e-15);
        }
    }

    #[test]
    fn cross_decays_far_away() {
        let spec = KernelSpec::squared_exponential(2.0, vec![0.5, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_matrix(&mut rng, 8, 2);
        let c = spec.cross(&x, &[100.0, -100.0]).unwrap();
        assert!(c.iter().all(|&v| v < 1e-8 * spec.variance()));
    }

    #[test]
    fn grads_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_matrix(&mut rng, 6, 2);
        let h = 1e-5;
        for spec in families() {
            let grads = spec.matrix_grads(&x).unwrap();
            let k = spec.matrix(&x).unwrap();
            // dK/dlog σf = 2K
            assert!((&grads[0] - 2.0 * &k).amax() < 1e-14);
            let p0 = spec.log_params();
            for (p, g) in grads.iter().enumerate() {
                let mut up = p0.clone();
                let mut dn = p0.clone();
                up[p] += h;
                dn[p] -= h;
                let kp = spec.with_log_params(&up).unwrap().matrix(&x).unwrap();
                let km = spec.with_log_params(&dn).unwrap().matrix(&x).unwrap();
                let fd = (kp - km) / (2.0 * h);
                for (a, b) in g.iter().zip(fd.iter()) {
                    let scale = a.abs().max(b.abs());
                    if scale > 1e-10 {
                        assert!((a - b).abs() / scale < 1e-5, "param {p}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn contraction_matches_explicit_gradient_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x = random_matrix(&mut rng, 9, 2);
        let a = random_matrix(&mut rng, 9, 9);
        let w = &a + a.transpose();
        for spec in families() {
            let fused = spec.contract_grads(&x, &w).unwrap();
            let explicit: Vec<f64> = spec
                .matrix_grads(&x)
                .unwrap()
                .iter()
                .map(|g| g.component_mul(&w).sum())
                .collect();
            for (f, e) in fused.iter().zip(&explicit) {
                assert!((f - e).abs() <= 1e-12 * e.abs().max(1.0), "{f} vs {e}");
            }
        }
    }

    #[test]
    fn grads_vanish_on_diagonal_for_length_scales() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_matrix(&mut rng, 4, 2);
        for spec in families() {
            let grads = spec.matrix_grads(&x).unwrap();
            for g in &grads[1..3] {
                for i in 0..4 {
                    assert_eq!(g[(i, i)], 0.0);
                }
            }
        }
    }

    #[test]
    fn numerically_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in [2, 7, 20] {
            for spec in families() {
                let x = random_matrix(&mut rng, n, 2);
                let k = spec.matrix(&x).unwrap();
                let min = SymmetricEigen::new(k).eigenvalues.min();
                assert!(min >= -1e-10 * n as f64 * spec.variance(), "min eig {min}");
            }
        }
    }

    #[test]
    fn rq_approaches_se_for_large_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_matrix(&mut rng, 10, 3);
        let se = KernelSpec::squared_exponential(1.7, vec![0.6, 1.2, 2.0]).unwrap();
        let rq = KernelSpec::rational_quadratic(1.7, vec![0.6, 1.2, 2.0], 1e6).unwrap();
        let diff = (se.matrix(&x).unwrap() - rq.matrix(&x).unwrap()).amax();
        assert!(diff < 1e-4 * se.variance(), "{diff}");
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            a in prop::collection::vec(-10.0f64..10.0, 3),
            b in prop::collection::vec(-10.0f64..10.0, 3),
            sf in 0.1f64..5.0,
            alpha in 0.1f64..10.0,
        ) {
            for spec in [
                KernelSpec::squared_exponential(sf, vec![0.5, 1.0, 3.0]).unwrap(),
                KernelSpec::rational_quadratic(sf, vec![0.5, 1.0, 3.0], alpha).unwrap(),
            ] {
                let kab = spec.eval(&a, &b).unwrap();
                prop_assert_eq!(kab, spec.eval(&b, &a).unwrap());
                let r2: f64 = a.iter().zip(&b).zip(spec.length_scales())
                    .map(|((x, y), l)| ((x - y) / l).powi(2)).sum();
                let corr = match spec.rq_alpha() {
                    None => (-0.5 * r2).exp(),
                    Some(al) => (1.0 + r2 / (2.0 * al)).powf(-al),
                };
                prop_assert_eq!(kab == 0.0, corr < CORRELATION_CUTOFF);
                prop_assert!(kab >= 0.0 && kab <= spec.variance());
            }
        }

        #[test]
        fn se_strictly_decreasing_in_distance(d1 in 0.0f64..5.0, gap in 1e-3f64..3.0) {
            let spec = KernelSpec::squared_exponential(1.0, vec![1.3]).unwrap();
            let near = spec.eval(&[0.0], &[d1]).unwrap();
            let far = spec.eval(&[0.0], &[d1 + gap]).unwrap();
            prop_assert!(far < near);
        }
    }
}
