//! Shared steps: load runs, split, fit any model family, score it.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use gpsurr_core::baselines::{ForestConfig, ForestModel, MlpConfig, MlpModel};
use gpsurr_core::dataset::{flatten, is_design_feature, split, DESIGN_FEATURES};
use gpsurr_core::{
    metrics, runs_csv, AnyModel, CurveKind, FlatDataset, GprModel, KernelFamily, KernelSpec,
    ModelKind, OptConfig, SimulationRun,
};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Context, Result};

/// Initial noise variance (standardized units) for hyperparameter search.
pub const INIT_NOISE: f64 = 1e-2;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of a settings object; keys are sorted by `serde_json`.
pub fn settings_hash(settings: &Value) -> String {
    sha256_hex(settings.to_string().as_bytes())
}

pub struct LoadedRuns {
    pub runs: Vec<SimulationRun>,
    pub kind: CurveKind,
    pub sha256: String,
}

pub fn load_runs(path: &Path) -> Result<LoadedRuns> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let runs = runs_csv::read_runs_from(&bytes[..]).context(path.display())?;
    let kind = runs
        .first()
        .map(|r| r.curve_kind)
        .ok_or_else(|| CliError::Data(format!("{}: no runs", path.display())))?;
    if runs.iter().any(|r| r.curve_kind != kind) {
        return Err(CliError::Data(format!(
            "{}: mixes reflectance and generation runs",
            path.display()
        )));
    }
    Ok(LoadedRuns {
        runs,
        kind,
        sha256: sha256_hex(&bytes),
    })
}

/// Input columns for a design-feature subset: the subset in canonical order,
/// then the sweep variable.
pub fn feature_columns(kind: CurveKind, features: Option<&[String]>) -> Result<Vec<String>> {
    let sweep = kind.sweep_name();
    let mut chosen: Vec<String> = match features {
        None => DESIGN_FEATURES.iter().map(|s| s.to_string()).collect(),
        Some(list) => {
            for f in list {
                if !is_design_feature(f) && f != sweep {
                    return Err(CliError::Usage(format!(
                        "unknown feature `{f}`; expected names from [{}]",
                        DESIGN_FEATURES.join(", ")
                    )));
                }
            }
            DESIGN_FEATURES
                .iter()
                .filter(|f| list.iter().any(|g| g == *f))
                .map(|s| s.to_string())
                .collect()
        }
    };
    chosen.push(sweep.to_string());
    Ok(chosen)
}

pub struct Prepared {
    pub kind: CurveKind,
    pub train: FlatDataset,
    pub test: FlatDataset,
}

/// Flattens, keeps `features` (plus the sweep) and splits whole runs.
pub fn prepare(
    runs: &[SimulationRun],
    features: Option<&[String]>,
    test_fraction: f64,
    seed: u64,
) -> Result<Prepared> {
    let kind = runs
        .first()
        .map(|r| r.curve_kind)
        .ok_or_else(|| CliError::Data("no runs".into()))?;
    let columns = feature_columns(kind, features)?;
    let flat = flatten(runs)?.select_features(&columns)?;
    let (train, test) = split(&flat, test_fraction, seed, true)?;
    Ok(Prepared { kind, train, test })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpSettings {
    pub family: KernelFamily,
    pub opt: OptConfig,
    pub max_train_rows: usize,
}

impl GpSettings {
    /// Defaults by curve kind: SE for reflectance, RQ for generation.
    pub fn for_kind(kind: CurveKind) -> Self {
        let family = match kind {
            CurveKind::Reflectance => KernelFamily::SquaredExponential,
            CurveKind::Generation => KernelFamily::RationalQuadratic,
        };
        GpSettings {
            family,
            opt: OptConfig {
                restarts: 1,
                hyper_subsample: Some(800),
                ..OptConfig::default()
            },
            max_train_rows: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings {
    pub gp: GpSettings,
    pub forest: ForestConfig,
    pub mlp: MlpConfig,
}

impl FitSettings {
    pub fn for_kind(kind: CurveKind, seed: u64) -> Self {
        let mut s = FitSettings {
            gp: GpSettings::for_kind(kind),
            forest: ForestConfig::default(),
            mlp: MlpConfig::default(),
        };
        s.set_seed(seed);
        s
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.gp.opt.seed = seed;
        self.forest.seed = seed;
        self.mlp.seed = seed;
    }
}

/// Fits a GP on at most `max_train_rows` random rows of `train`.
pub fn fit_gpr(train: &FlatDataset, gp: &GpSettings) -> Result<GprModel> {
    let rows = train.subsample(gp.max_train_rows, gp.opt.seed);
    let init = KernelSpec::default_for(gp.family, rows.dim());
    Ok(GprModel::fit(&rows, &init, INIT_NOISE, &gp.opt)?)
}

pub fn fit_model(kind: ModelKind, train: &FlatDataset, s: &FitSettings) -> Result<AnyModel> {
    let m = match kind {
        ModelKind::Gpr => AnyModel::Gpr(fit_gpr(train, &s.gp)?),
        ModelKind::Rf => AnyModel::Rf(ForestModel::fit(train, &s.forest)?),
        ModelKind::Mlp => AnyModel::Mlp(MlpModel::fit(train, &s.mlp)?),
    };
    Ok(m)
}

/// Fits and times a model.
pub fn fit_timed(kind: ModelKind, train: &FlatDataset, s: &FitSettings) -> Result<(AnyModel, f64)> {
    let t = Instant::now();
    let m = fit_model(kind, train, s).context(format!("training {kind}"))?;
    Ok((m, t.elapsed().as_secs_f64()))
}

/// Test-set predictions and scores of one model.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub means: Vec<f64>,
    pub variances: Option<Vec<f64>>,
    pub r2: f64,
    pub rmse: f64,
    /// Mean of `2·z·σ` over test rows (GP only).
    pub mean_ci_width: Option<f64>,
    /// Fraction of test targets inside `mean ± z·σ` (GP only).
    pub coverage: Option<f64>,
}

pub fn evaluate(model: &AnyModel, test: &FlatDataset, z: f64) -> Result<Evaluation> {
    if model.feature_names() != test.feature_names.as_slice() {
        return Err(CliError::Data(format!(
            "model features [{}] differ from data features [{}]",
            model.feature_names().join(", "),
            test.feature_names.join(", ")
        )));
    }
    let rows: Vec<Vec<f64>> = (0..test.len()).map(|i| test.row(i)).collect();
    let preds = model.predict_batch(&rows)?;
    let means: Vec<f64> = preds.iter().map(|p| p.mean).collect();
    let variances: Option<Vec<f64>> = preds.iter().map(|p| p.variance).collect();
    let (mean_ci_width, coverage) = match &variances {
        Some(v) => {
            let sd: Vec<f64> = v.iter().map(|v| v.sqrt()).collect();
            let lo: Vec<f64> = means.iter().zip(&sd).map(|(m, s)| m - z * s).collect();
            let hi: Vec<f64> = means.iter().zip(&sd).map(|(m, s)| m + z * s).collect();
            let width = sd.iter().map(|s| 2.0 * z * s).sum::<f64>() / sd.len() as f64;
            (Some(width), Some(metrics::coverage(&test.targets, &lo, &hi)))
        }
        None => (None, None),
    };
    Ok(Evaluation {
        r2: metrics::r2(&test.targets, &means),
        rmse: metrics::rmse(&test.targets, &means),
        means,
        variances,
        mean_ci_width,
        coverage,
    })
}

/// Metrics JSON written by `train` and summarized by `compare`.
#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub model: ModelKind,
    pub r2: f64,
    pub rmse: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_ci_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<f64>,
    pub z: f64,
    pub train_time: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub features: Vec<String>,
    pub target: String,
    pub seed: u64,
    pub config_hash: String,
}

/// Run facts shared by every model of one invocation.
#[derive(Debug, Clone)]
pub struct RunInfo {
    pub seed: u64,
    pub config_hash: String,
    pub train_rows: usize,
    pub test_rows: usize,
}

impl Metrics {
    pub fn new(model: &AnyModel, eval: &Evaluation, z: f64, train_time: f64, run: &RunInfo) -> Self {
        // a GP is conditioned on a subset when the split exceeds its row cap
        let n_train = match model {
            AnyModel::Gpr(m) => m.n_train(),
            _ => run.train_rows,
        };
        Metrics {
            model: model.kind(),
            r2: eval.r2,
            rmse: eval.rmse,
            mean_ci_width: eval.mean_ci_width,
            coverage: eval.coverage,
            z,
            train_time,
            n_train,
            n_test: run.test_rows,
            features: model.feature_names().to_vec(),
            target: model.target_name().to_string(),
            seed: run.seed,
            config_hash: run.config_hash.clone(),
        }
    }
}

/// Provenance entries stored in model file headers.
pub fn provenance(command: &str, config_hash: &str, seed: u64, data_sha256: &str) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("command".to_string(), command.to_string()),
        ("config_hash".to_string(), config_hash.to_string()),
        ("seed".to_string(), seed.to_string()),
        ("data_sha256".to_string(), data_sha256.to_string()),
    ])
}
