use gpsurr_core::oracle::{config_hash, generate_database, GridSpec, OpticalConstants, ORACLE_VERSION};
use gpsurr_core::{runs_csv, CurveKind};
use serde::Serialize;

use crate::args::GenerateArgs;
use crate::error::{Context, Result};
use crate::io::{json_arg, require_parent};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerateSummary {
    pub kind: CurveKind,
    pub runs: usize,
    pub rows: usize,
    pub seed: u64,
    pub noise_sd: f64,
    pub config_hash: String,
}

pub fn default_noise_sd(kind: CurveKind) -> f64 {
    match kind {
        CurveKind::Reflectance => 0.005,
        CurveKind::Generation => 0.0,
    }
}

pub fn run(args: &GenerateArgs) -> Result<GenerateSummary> {
    require_parent(&args.out, "out")?;
    let kind: CurveKind = args.kind.into();
    let grid: GridSpec = match &args.grid {
        Some(g) => json_arg(g, "grid")?,
        None => GridSpec::default(),
    };
    let constants: OpticalConstants = match &args.constants {
        Some(c) => json_arg(c, "constants")?,
        None => OpticalConstants::default(),
    };
    grid.validate().context("--grid")?;
    constants.validate().context("--constants")?;
    let noise_sd = args.noise_sd.unwrap_or_else(|| default_noise_sd(kind));
    let seed = args.seed.seed;

    let runs = generate_database(&grid, kind, &constants, noise_sd, seed)?;
    let hash = config_hash(&grid, kind, &constants, noise_sd, seed);
    let comments = vec![
        format!("oracle_version={ORACLE_VERSION}"),
        format!("config_hash={hash}"),
        format!("seed={seed}"),
        format!("kind={}", kind.as_str()),
        format!("noise_sd={noise_sd}"),
    ];
    runs_csv::write_runs(&runs, &comments, &args.out).context(args.out.display())?;
    let rows = runs.iter().map(|r| r.sweep.len()).sum();
    Ok(GenerateSummary {
        kind,
        runs: runs.len(),
        rows,
        seed,
        noise_sd,
        config_hash: hash,
    })
}
