use std::collections::BTreeMap;

use gpsurr_core::dataset::{flatten, is_design_feature, make_inverse_dataset, DESIGN_FEATURES};
use gpsurr_core::oracle::{reflectance_at, OpticalConstants};
use gpsurr_core::{model_file, AnyModel, CellDesign, CurveKind, FlatDataset, GprModel};
use serde::Serialize;
use serde_json::json;

use crate::args::BackpredictArgs;
use crate::commands::train::gp_settings;
use crate::error::{CliError, Context, Result};
use crate::io::{design_map, json_arg, require_file, require_parent, to_json_pretty, write_file};
use crate::pipeline::{fit_gpr, load_runs, provenance, settings_hash};

/// Oracle evaluations across the interval when checking closure.
const CI_SCAN_POINTS: usize = 201;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackPrediction {
    pub requested_reflectance: f64,
    pub mean: f64,
    pub variance: f64,
    pub std: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    /// Oracle reflectance of the design with the predicted mean; `None` when
    /// that design is not physical.
    pub achieved_reflectance: Option<f64>,
    pub abs_error: Option<f64>,
    /// Lowest and highest oracle reflectance over `[ci_lower, ci_upper]`.
    pub ci_reflectance_range: Option<[f64; 2]>,
    /// The requested value lies inside `ci_reflectance_range`.
    pub within_ci: bool,
    /// The requested value lies outside the reflectances seen in training.
    pub out_of_range: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackpredictReport {
    pub target: String,
    pub wavelength_nm: f64,
    pub window_nm: f64,
    pub z: f64,
    pub design: BTreeMap<String, f64>,
    pub n_window_rows: usize,
    pub n_train: usize,
    pub training_reflectance_range: [f64; 2],
    pub predictions: Vec<BackPrediction>,
    pub seed: u64,
    pub config_hash: String,
}

/// Rows whose wavelength lies within `window` of `wavelength`.
pub fn window_rows(data: &FlatDataset, wavelength: f64, window: f64) -> Result<FlatDataset> {
    let k = data.feature_index(CurveKind::Reflectance.sweep_name())?;
    let rows = data.filter_rows(|x, _| (x[k] - wavelength).abs() <= window);
    if rows.is_empty() {
        return Err(CliError::Data(format!(
            "no training rows within {window} nm of {wavelength} nm"
        )));
    }
    Ok(rows)
}

/// Oracle reflectance with `target` set to `value`, or `None` if the
/// resulting design is invalid.
fn forward(design: &BTreeMap<String, f64>, target: &str, value: f64, wl: f64, c: &OpticalConstants) -> Option<f64> {
    let mut d = design.clone();
    d.insert(target.to_string(), value);
    let cell = CellDesign::from_feature_map(&d).ok()?;
    reflectance_at(&cell, wl, c).ok()
}

/// Range of oracle reflectance while `target` sweeps `[lo, hi]`; points
/// that make the design invalid are skipped.
fn reflectance_range(
    design: &BTreeMap<String, f64>,
    target: &str,
    lo: f64,
    hi: f64,
    wl: f64,
    c: &OpticalConstants,
) -> Option<[f64; 2]> {
    let n = CI_SCAN_POINTS;
    let vals: Vec<f64> = (0..n)
        .filter_map(|i| {
            let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            forward(design, target, t, wl, c)
        })
        .collect();
    if vals.is_empty() {
        return None;
    }
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some([min, max])
}

/// Trains the inverse GP and answers each requested reflectance.
pub fn run_with_model(args: &BackpredictArgs) -> Result<(BackpredictReport, GprModel)> {
    require_file(&args.data, "data")?;
    for (p, flag) in [(&args.out, "out"), (&args.model_out, "model-out")] {
        if let Some(p) = p {
            require_parent(p, flag)?;
        }
    }
    if !is_design_feature(&args.target) {
        return Err(CliError::Usage(format!(
            "--target `{}` is not a design feature; expected one of [{}]",
            args.target,
            DESIGN_FEATURES.join(", ")
        )));
    }
    if !(args.z >= 0.0 && args.z.is_finite()) {
        return Err(CliError::Usage(format!("--z must be >= 0, got {}", args.z)));
    }
    let seed = args.seed.seed;
    let loaded = load_runs(&args.data)?;
    if loaded.kind != CurveKind::Reflectance {
        return Err(CliError::Data("back-prediction needs reflectance runs".into()));
    }
    let constants: OpticalConstants = match &args.constants {
        Some(c) => json_arg(c, "constants")?,
        None => OpticalConstants::default(),
    };
    let gp = gp_settings(loaded.kind, seed, &args.gp)?;

    let mut design = design_map(&args.design)?;
    if design.remove(&args.target).is_some() {
        log::info!("ignoring given `{}`: it is the predicted quantity", args.target);
    }
    let flat = flatten(&loaded.runs)?;
    let window = window_rows(&flat, args.wavelength, args.window)?;
    let inverse = make_inverse_dataset(&window, &args.target)?;
    let r_col = inverse.feature_index(CurveKind::Reflectance.target_name())?;
    let r_seen: Vec<f64> = (0..inverse.len()).map(|i| inverse.inputs[(i, r_col)]).collect();
    let r_lo = r_seen.iter().copied().fold(f64::INFINITY, f64::min);
    let r_hi = r_seen.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let settings = json!({
        "data_sha256": loaded.sha256,
        "target": args.target,
        "wavelength": args.wavelength,
        "window": args.window,
        "reflectance": args.reflectance,
        "design": design,
        "z": args.z,
        "gp": { "family": gp.family, "opt": gp.opt, "max_train_rows": gp.max_train_rows },
        "constants": constants,
        "seed": seed,
    });
    let hash = settings_hash(&settings);
    log::info!("fitting inverse GP on {} window rows", inverse.len());
    let model = fit_gpr(&inverse, &gp).context("training inverse GP")?;
    let any = AnyModel::Gpr(model.clone());

    let mut predictions = Vec::with_capacity(args.reflectance.len());
    for &r in &args.reflectance {
        let mut fixed: BTreeMap<String, f64> = design
            .iter()
            .filter(|(k, _)| model.feature_names().contains(k))
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        fixed.insert(CurveKind::Reflectance.target_name().into(), r);
        fixed.insert(CurveKind::Reflectance.sweep_name().into(), args.wavelength);
        let p = any.predict_features(&fixed).context(format!("reflectance {r}"))?;
        let variance = p.variance.expect("GP predictions carry variance");
        let std = variance.sqrt();
        let (ci_lower, ci_upper) = (p.mean - args.z * std, p.mean + args.z * std);
        let achieved = forward(&design, &args.target, p.mean, args.wavelength, &constants);
        let range = reflectance_range(&design, &args.target, ci_lower, ci_upper, args.wavelength, &constants);
        let within_ci = range.is_some_and(|[a, b]| a <= r && r <= b);
        let out_of_range = r < r_lo || r > r_hi;
        if out_of_range {
            log::warn!(
                "requested reflectance {r} is outside the training range [{r_lo}, {r_hi}]; expect a wide interval"
            );
        }
        predictions.push(BackPrediction {
            requested_reflectance: r,
            mean: p.mean,
            variance,
            std,
            ci_lower,
            ci_upper,
            achieved_reflectance: achieved,
            abs_error: achieved.map(|a| (a - r).abs()),
            ci_reflectance_range: range,
            within_ci,
            out_of_range,
        });
    }
    let report = BackpredictReport {
        target: args.target.clone(),
        wavelength_nm: args.wavelength,
        window_nm: args.window,
        z: args.z,
        design,
        n_window_rows: window.len(),
        n_train: model.n_train(),
        training_reflectance_range: [r_lo, r_hi],
        predictions,
        seed,
        config_hash: hash.clone(),
    };
    if let Some(p) = &args.model_out {
        model_file::save_with(&any, p, &provenance("backpredict", &hash, seed, &loaded.sha256))
            .context(p.display())?;
    }
    if let Some(p) = &args.out {
        write_file(p, to_json_pretty(&report))?;
    }
    Ok((report, model))
}

pub fn run(args: &BackpredictArgs) -> Result<BackpredictReport> {
    run_with_model(args).map(|(r, _)| r)
}
