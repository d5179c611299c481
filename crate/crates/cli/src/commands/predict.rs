use std::collections::BTreeMap;
use std::path::Path;

use gpsurr_core::dataset::{is_design_feature, WAFER_THICKNESS};
use gpsurr_core::gpr::linspace;
use gpsurr_core::oracle::{
    default_wavelengths, depth_grid, generation_at, reflectance_at, OpticalConstants,
};
use gpsurr_core::{model_file, AnyModel, AnyProfile, CellDesign, CurveKind};
use gpsurr_service::api::ProfileResponse;
use serde_json::json;

use crate::args::PredictArgs;
use crate::error::{CliError, Context, Result};
use crate::io::{design_map, json_arg, opt_cell, require_file, require_parent, write_file};
use crate::pipeline::{settings_hash, sha256_hex};

/// Depth points of a default generation sweep.
pub const DEFAULT_DEPTH_POINTS: usize = 224;

#[derive(Debug, Clone)]
pub struct PredictOutput {
    pub profile: AnyProfile,
    pub truth: Option<Vec<f64>>,
    /// The profile CSV, comments included.
    pub csv: String,
    /// The profile JSON body.
    pub json: String,
}

/// Model id used by the service for a model file: its stem.
pub fn model_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Restricts a design map to the model's inputs. Design features the model
/// was not trained on are dropped; any other unknown name is kept so the
/// model reports it.
pub fn model_inputs(model: &AnyModel, design: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let names = model.feature_names();
    design
        .iter()
        .filter(|(k, _)| {
            let keep = names.contains(k) || !is_design_feature(k);
            if !keep {
                log::info!("ignoring `{k}`: not an input of this model");
            }
            keep
        })
        .map(|(k, v)| (k.clone(), *v))
        .collect()
}

fn sweep_grid(args: &PredictArgs, kind: Option<CurveKind>, design: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
    if let Some(v) = &args.sweep_values {
        return Ok(v.clone());
    }
    if let (Some(start), Some(stop), Some(count)) = (args.start, args.stop, args.count) {
        return Ok(linspace(start, stop, count)?);
    }
    match kind {
        Some(CurveKind::Reflectance) => Ok(default_wavelengths()),
        Some(CurveKind::Generation) => match design.get(WAFER_THICKNESS) {
            Some(&w) if w > 0.0 => Ok(depth_grid(w, DEFAULT_DEPTH_POINTS)),
            _ => Err(CliError::Usage(format!(
                "a default depth sweep needs `{WAFER_THICKNESS}`; give it or pass --sweep-values / --start --stop --count"
            ))),
        },
        None => Err(CliError::Usage(
            "the model has no known sweep feature; pass --sweep-values or --start --stop --count"
                .into(),
        )),
    }
}

/// Noise-free oracle values along the sweep for a full design.
pub fn oracle_curve(
    design: &BTreeMap<String, f64>,
    kind: CurveKind,
    grid: &[f64],
    constants: &OpticalConstants,
) -> Result<Vec<f64>> {
    let d = CellDesign::from_feature_map(design).context("--truth")?;
    let values = match kind {
        CurveKind::Reflectance => grid
            .iter()
            .map(|&wl| reflectance_at(&d, wl, constants))
            .collect::<gpsurr_core::Result<Vec<f64>>>()?,
        CurveKind::Generation => generation_at(&d, grid, &default_wavelengths(), constants)?,
    };
    Ok(values)
}

pub fn profile_csv(profile: &AnyProfile, truth: Option<&[f64]>, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    let mut header = vec![profile.sweep_feature.as_str(), "mean", "variance", "ci_lower", "ci_upper"];
    if truth.is_some() {
        header.push("oracle");
    }
    out.push_str(&header.join(","));
    out.push('\n');
    let at = |v: &Option<Vec<f64>>, i: usize| v.as_ref().map(|v| v[i]);
    for i in 0..profile.sweep_values.len() {
        let mut cells = vec![
            profile.sweep_values[i].to_string(),
            profile.means[i].to_string(),
            opt_cell(at(&profile.variances, i)),
            opt_cell(at(&profile.ci_lower, i)),
            opt_cell(at(&profile.ci_upper, i)),
        ];
        if let Some(t) = truth {
            cells.push(t[i].to_string());
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn run(args: &PredictArgs) -> Result<PredictOutput> {
    require_file(&args.model, "model")?;
    for (p, flag) in [(&args.out, "out"), (&args.json_out, "json-out")] {
        if let Some(p) = p {
            require_parent(p, flag)?;
        }
    }
    let bytes = std::fs::read(&args.model)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.model.display())))?;
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Data(format!("{}: not UTF-8", args.model.display())))?;
    let model = model_file::from_json(&text).context(args.model.display())?;
    let design = design_map(&args.design)?;
    let sweep = model.sweep_feature().ok_or_else(|| {
        CliError::Data(format!(
            "model inputs [{}] contain no sweep variable",
            model.feature_names().join(", ")
        ))
    })?;
    let kind = CurveKind::from_sweep_name(&sweep);
    let grid = sweep_grid(args, kind, &design)?;
    let fixed = model_inputs(&model, &design);
    let profile = model.predict_profile(&fixed, &sweep, &grid, args.z)?;

    let truth = if args.truth {
        let kind = kind.ok_or_else(|| CliError::Usage("--truth needs a known sweep".into()))?;
        let constants: OpticalConstants = match &args.constants {
            Some(c) => json_arg(c, "constants")?,
            None => OpticalConstants::default(),
        };
        Some(oracle_curve(&design, kind, &grid, &constants)?)
    } else {
        None
    };

    let model_sha = sha256_hex(text.as_bytes());
    let hash = settings_hash(&json!({
        "model_sha256": model_sha,
        "fixed": fixed,
        "grid": grid,
        "z": args.z,
        "truth": args.truth,
    }));
    let comments = vec![
        format!("model_sha256={model_sha}"),
        format!("config_hash={hash}"),
        format!("z={}", args.z),
    ];
    let csv = profile_csv(&profile, truth.as_deref(), &comments);
    let json = serde_json::to_string(&ProfileResponse::new(&model_id(&args.model), profile.clone()))
        .expect("serializable response");
    if let Some(p) = &args.out {
        write_file(p, &csv)?;
    }
    if let Some(p) = &args.json_out {
        write_file(p, &json)?;
    }
    Ok(PredictOutput {
        profile,
        truth,
        csv,
        json,
    })
}
