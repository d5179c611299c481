use gpsurr_core::ModelKind;
use serde::Serialize;

use crate::args::CompareArgs;
use crate::commands::train::{fit_settings, settings_json};
use crate::error::Result;
use crate::io::{opt_cell, require_file, require_parent, to_json_pretty, write_file};
use crate::pipeline::{evaluate, fit_timed, load_runs, prepare, settings_hash, Metrics, RunInfo};

pub const MODELS: [ModelKind; 3] = [ModelKind::Gpr, ModelKind::Rf, ModelKind::Mlp];

#[derive(Debug, Clone, Serialize)]
pub struct CompareSummary {
    pub seed: u64,
    pub config_hash: String,
    pub data_sha256: String,
    pub models: Vec<Metrics>,
}

#[derive(Debug, Clone)]
pub struct CompareOutput {
    pub summary: CompareSummary,
    /// Per test point and model: truth, mean and (GP only) variance and CI.
    pub table_csv: String,
}

/// Fixed-width text rendering of the summary.
pub fn summary_table(s: &CompareSummary) -> String {
    let mut out = format!(
        "{:<6} {:>9} {:>10} {:>14} {:>10}\n",
        "model", "r2", "rmse", "mean_ci_width", "train_s"
    );
    for m in &s.models {
        let width = m.mean_ci_width.map(|w| format!("{w:.5}")).unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:<6} {:>9.5} {:>10.5} {:>14} {:>10.2}\n",
            m.model.as_str(),
            m.r2,
            m.rmse,
            width,
            m.train_time
        ));
    }
    out
}

pub fn run(args: &CompareArgs) -> Result<CompareOutput> {
    require_file(&args.data.data, "data")?;
    for (p, flag) in [(&args.out, "out"), (&args.summary, "summary")] {
        if let Some(p) = p {
            require_parent(p, flag)?;
        }
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
    let info = RunInfo {
        seed,
        config_hash: hash.clone(),
        train_rows: prepared.train.len(),
        test_rows: prepared.test.len(),
    };
    let test = &prepared.test;
    let sweep_col = test.feature_index(prepared.kind.sweep_name())?;

    let mut table = format!("# config_hash={hash}\n# seed={seed}\n");
    table.push_str(&format!(
        "model,run_id,{},truth,mean,variance,ci_lower,ci_upper\n",
        prepared.kind.sweep_name()
    ));
    let mut models = Vec::with_capacity(MODELS.len());
    for kind in MODELS {
        log::info!("compare: training {kind}");
        let (model, secs) = fit_timed(kind, &prepared.train, &settings)?;
        let eval = evaluate(&model, test, args.z)?;
        for i in 0..test.len() {
            let var = eval.variances.as_ref().map(|v| v[i]);
            let half = var.map(|v| args.z * v.sqrt());
            let mean = eval.means[i];
            table.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                kind.as_str(),
                test.run_ids[i],
                test.inputs[(i, sweep_col)],
                test.targets[i],
                mean,
                opt_cell(var),
                opt_cell(half.map(|h| mean - h)),
                opt_cell(half.map(|h| mean + h)),
            ));
        }
        models.push(Metrics::new(&model, &eval, args.z, secs, &info));
    }
    let summary = CompareSummary {
        seed,
        config_hash: hash,
        data_sha256: loaded.sha256,
        models,
    };
    if let Some(p) = &args.out {
        write_file(p, &table)?;
    }
    if let Some(p) = &args.summary {
        write_file(p, to_json_pretty(&summary))?;
    }
    Ok(CompareOutput {
        summary,
        table_csv: table,
    })
}
