use gpsurr_core::model_file;
use gpsurr_core::{CurveKind, ModelKind};
use serde_json::{json, Value};

use crate::args::{DataArgs, GpArgs, MlpArgs, RfArgs, TrainArgs};
use crate::error::{CliError, Context, Result};
use crate::io::{require_file, require_parent, to_json_pretty, write_file};
use crate::pipeline::{
    evaluate, fit_timed, load_runs, prepare, provenance, settings_hash, FitSettings, GpSettings,
    Metrics, RunInfo,
};

/// GP settings for a dataset of `kind` with the command-line overrides.
pub fn gp_settings(kind: CurveKind, seed: u64, gp: &GpArgs) -> Result<GpSettings> {
    if gp.max_train_rows == 0 || gp.hyper_subsample == 0 {
        return Err(CliError::Usage(
            "--max-train-rows and --hyper-subsample must be positive".into(),
        ));
    }
    let mut s = GpSettings::for_kind(kind);
    if let Some(k) = gp.kernel {
        s.family = k.into();
    }
    s.opt.seed = seed;
    s.opt.restarts = gp.restarts;
    s.opt.max_iters = gp.max_iters;
    s.opt.hyper_subsample = Some(gp.hyper_subsample);
    s.max_train_rows = gp.max_train_rows;
    Ok(s)
}

/// Resolves the fit settings for a dataset of `kind`.
pub fn fit_settings(
    kind: CurveKind,
    seed: u64,
    gp: &GpArgs,
    rf: &RfArgs,
    mlp: &MlpArgs,
) -> Result<FitSettings> {
    let mut s = FitSettings::for_kind(kind, seed);
    s.gp = gp_settings(kind, seed, gp)?;
    s.forest.n_trees = rf.trees;
    s.forest.max_depth = rf.max_depth;
    s.forest.min_leaf = rf.min_leaf;
    let [h1, h2] = <[usize; 2]>::try_from(mlp.hidden.as_slice()).map_err(|_| {
        CliError::Usage(format!("--hidden takes two widths, got {}", mlp.hidden.len()))
    })?;
    s.mlp.h1 = h1;
    s.mlp.h2 = h2;
    s.mlp.epochs = mlp.epochs;
    s.mlp.step = mlp.step;
    s.mlp.batch = mlp.batch;
    Ok(s)
}

/// Everything that determines a training result, for hashing.
pub fn settings_json(data: &DataArgs, data_sha: &str, s: &FitSettings, z: f64) -> Value {
    json!({
        "data_sha256": data_sha,
        "features": data.features,
        "test_fraction": data.test_fraction,
        "seed": data.seed.seed,
        "z": z,
        "gp": {
            "family": s.gp.family,
            "opt": s.gp.opt,
            "max_train_rows": s.gp.max_train_rows,
        },
        "forest": s.forest,
        "mlp": s.mlp,
    })
}

pub fn run(args: &TrainArgs) -> Result<Metrics> {
    require_file(&args.data.data, "data")?;
    require_parent(&args.out, "out")?;
    if let Some(m) = &args.metrics {
        require_parent(m, "metrics")?;
    }
    let seed = args.data.seed.seed;
    let loaded = load_runs(&args.data.data)?;
    let settings = fit_settings(loaded.kind, seed, &args.gp, &args.rf, &args.mlp)?;
    let prepared = prepare(
        &loaded.runs,
        args.data.features.as_deref(),
        args.data.test_fraction,
        seed,
    )?;
    let hash = settings_hash(&settings_json(&args.data, &loaded.sha256, &settings, args.z));
    let kind: ModelKind = args.model.into();
    log::info!(
        "training {kind} on {} rows ({} test) with features {:?}",
        prepared.train.len(),
        prepared.test.len(),
        prepared.train.feature_names
    );
    let (model, secs) = fit_timed(kind, &prepared.train, &settings)?;
    let eval = evaluate(&model, &prepared.test, args.z).context("evaluating")?;
    let info = RunInfo {
        seed,
        config_hash: hash.clone(),
        train_rows: prepared.train.len(),
        test_rows: prepared.test.len(),
    };
    let metrics = Metrics::new(&model, &eval, args.z, secs, &info);
    model_file::save_with(
        &model,
        &args.out,
        &provenance("train", &hash, seed, &loaded.sha256),
    )
    .context(args.out.display())?;
    if let Some(path) = &args.metrics {
        write_file(path, to_json_pretty(&metrics))?;
    }
    Ok(metrics)
}
