mod common;

use common::dataset;
use gpsurr_core::metrics::coverage;
use gpsurr_core::{GprModel, KernelFamily, KernelSpec, OptConfig};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[test]
fn recovers_noise_free_sine() {
    let n = 25;
    let xs: Vec<f64> = (0..n).map(|i| std::f64::consts::TAU * i as f64 / (n - 1) as f64).collect();
    let data = dataset(DMatrix::from_column_slice(n, 1, &xs), xs.iter().map(|x| x.sin()).collect());
    let init = KernelSpec::default_for(KernelFamily::SquaredExponential, 1);
    let model = GprModel::fit(&data, &init, 1e-2, &OptConfig::default()).unwrap();
    assert!(model.noise_variance() < 1e-4, "noise {}", model.noise_variance());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let x = rng.random_range(0.0..std::f64::consts::TAU);
        let m = model.predict(&[x]).unwrap().mean;
        assert!((m - x.sin()).abs() < 1e-3, "x={x}: {m} vs {}", x.sin());
    }
}

#[test]
fn white_noise_is_explained_as_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let n = 50;
    let x = DMatrix::from_fn(n, 1, |_, _| rng.random_range(0.0..10.0));
    let y: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    let data = dataset(x, y);
    let init = KernelSpec::default_for(KernelFamily::SquaredExponential, 1);
    let model = GprModel::fit(&data, &init, 0.1, &OptConfig::default()).unwrap();
    let s = model.standardizer().target_scale;
    let noise = model.noise_variance() * s * s;
    assert!((0.5..=1.5).contains(&noise), "noise variance {noise}");
    for i in 0..=100 {
        let m = model.predict(&[i as f64 * 0.1]).unwrap().mean;
        assert!(m.abs() < 0.5, "mean {m}");
    }
}

/// Smooth 2-D function with homoscedastic Gaussian noise of known size.
fn synthetic(n: usize, sd: f64, rng: &mut ChaCha8Rng) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let normal = Normal::new(0.0, sd).unwrap();
    let x = DMatrix::from_fn(n, 2, |_, _| rng.random_range(0.0f64..3.0));
    let f: Vec<f64> = (0..n).map(|i| (2.0 * x[(i, 0)]).sin() + 0.5 * x[(i, 1)].powi(2)).collect();
    let y = f.iter().map(|v| v + normal.sample(rng)).collect();
    (x, f, y)
}

#[test]
fn intervals_are_calibrated_on_known_noise() {
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, _, y) = synthetic(200, 0.1, &mut rng);
        let (xt, _, yt) = synthetic(600, 0.1, &mut rng);
        let init = KernelSpec::default_for(KernelFamily::SquaredExponential, 2);
        let cfg = OptConfig { seed, ..Default::default() };
        let model = GprModel::fit(&dataset(x, y), &init, 0.1, &cfg).unwrap();
        let rows: Vec<Vec<f64>> = (0..600).map(|i| vec![xt[(i, 0)], xt[(i, 1)]]).collect();
        let preds = model.predict_batch(&rows).unwrap();
        let lo: Vec<f64> = preds.iter().map(|p| p.interval(2.0).0).collect();
        let hi: Vec<f64> = preds.iter().map(|p| p.interval(2.0).1).collect();
        let c = coverage(&yt, &lo, &hi);
        assert!((0.90..=0.99).contains(&c), "seed {seed}: coverage {c}");
    }
}

#[test]
fn deleted_band_has_wider_intervals() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (x, _, y) = synthetic(300, 0.05, &mut rng);
    let keep: Vec<usize> = (0..300).filter(|&i| !(1.0..2.0).contains(&x[(i, 0)])).collect();
    let data = dataset(x, y).take_rows(&keep);
    let init = KernelSpec::default_for(KernelFamily::SquaredExponential, 2);
    let model = GprModel::fit(&data, &init, 0.1, &OptConfig::default()).unwrap();
    let (mut inside, mut outside) = (vec![], vec![]);
    for i in 0..60 {
        for j in 0..10 {
            let p = [i as f64 * 0.05, j as f64 * 0.3];
            let sd = model.predict(&p).unwrap().std();
            if (1.0..2.0).contains(&p[0]) { inside.push(sd) } else { outside.push(sd) }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&inside) > mean(&outside), "{} vs {}", mean(&inside), mean(&outside));
}

#[test]
fn rational_quadratic_fit_improves_likelihood() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (x, _, y) = synthetic(80, 0.05, &mut rng);
    let data = dataset(x, y);
    let init = KernelSpec::default_for(KernelFamily::RationalQuadratic, 2);
    let fixed = GprModel::fit(&data, &init, 0.1, &OptConfig { max_iters: 0, ..Default::default() }).unwrap();
    let fitted = GprModel::fit(&data, &init, 0.1, &OptConfig::default()).unwrap();
    assert!(fitted.log_marginal_likelihood() > fixed.log_marginal_likelihood());
    assert!(fitted.kernel().rq_alpha().is_some());
}

#[test]
fn hyper_subsample_still_conditions_on_every_row() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (x, _, y) = synthetic(150, 0.05, &mut rng);
    let data = dataset(x, y);
    let init = KernelSpec::default_for(KernelFamily::SquaredExponential, 2);
    let cfg = OptConfig { hyper_subsample: Some(40), restarts: 1, ..Default::default() };
    let model = GprModel::fit(&data, &init, 0.1, &cfg).unwrap();
    assert_eq!(model.n_train(), 150);
    let again = GprModel::fit(&data, &init, 0.1, &cfg).unwrap();
    assert_eq!(model, again);
}
