//! Command-line surface. Flag names here are the stable public interface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gpsurr_core::{CurveKind, KernelFamily, ModelKind};

#[derive(Debug, Parser)]
#[command(
    name = "gpsurr",
    version,
    about = "Gaussian-process surrogates for solar-cell optical curves",
    propagate_version = true,
    args_override_self = true
)]
pub struct Cli {
    /// JSON file of default option values; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a full-factorial design database with the optical oracle.
    Generate(GenerateArgs),
    /// Fit a model on a runs CSV and report held-out metrics.
    Train(TrainArgs),
    /// Predict a curve for one design from a saved model.
    Predict(PredictArgs),
    /// Predict the design value that yields requested reflectances.
    Backpredict(BackpredictArgs),
    /// Train GPR, random forest and MLP on one split and tabulate the results.
    Compare(CompareArgs),
    /// Serve saved models over HTTP.
    Serve(ServeArgs),
}

impl Command {
    pub const NAMES: [&'static str; 6] =
        ["generate", "train", "predict", "backpredict", "compare", "serve"];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Reflectance,
    Generation,
}

impl From<KindArg> for CurveKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Reflectance => CurveKind::Reflectance,
            KindArg::Generation => CurveKind::Generation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Gpr,
    Rf,
    Mlp,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Gpr => ModelKind::Gpr,
            ModelArg::Rf => ModelKind::Rf,
            ModelArg::Mlp => ModelKind::Mlp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Se,
    Rq,
}

impl From<KernelArg> for KernelFamily {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Se => KernelFamily::SquaredExponential,
            KernelArg::Rq => KernelFamily::RationalQuadratic,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    /// Seed for every random choice (noise, splits, subsets, initializations).
    #[arg(long, env = "GPSURR_SEED", hide_env_values = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Curve family to simulate.
    #[arg(long, value_enum, default_value_t = KindArg::Reflectance)]
    pub kind: KindArg,

    /// Output runs CSV.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    /// Design grid as a JSON file path or inline JSON object.
    #[arg(long, value_name = "FILE|JSON")]
    pub grid: Option<String>,

    /// Optical constants as a JSON file path or inline JSON object.
    #[arg(long, value_name = "FILE|JSON")]
    pub constants: Option<String>,

    /// Gaussian noise SD added to every value [default: 0.005 for
    /// reflectance, 0 for generation].
    #[arg(long)]
    pub noise_sd: Option<f64>,

    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Runs CSV produced by `generate`.
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,

    /// Design features to train on (comma separated); the sweep variable is
    /// always included [default: all six].
    #[arg(long, value_delimiter = ',', value_name = "NAMES")]
    pub features: Option<Vec<String>>,

    /// Fraction of runs held out for testing.
    #[arg(long, default_value_t = 0.25)]
    pub test_fraction: f64,

    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Clone, Args)]
pub struct GpArgs {
    /// Covariance family [default: se for reflectance, rq for generation].
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,

    /// Random optimizer restarts besides the default initialization.
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,

    /// Optimizer iteration cap per start; 0 keeps the initial hyperparameters.
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,

    /// Random subset of training rows the GP is conditioned on.
    #[arg(long, default_value_t = 2000)]
    pub max_train_rows: usize,

    /// Rows used for hyperparameter optimization.
    #[arg(long, default_value_t = 800)]
    pub hyper_subsample: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RfArgs {
    /// Random forest: number of trees.
    #[arg(long, default_value_t = 100)]
    pub trees: usize,

    /// Random forest: maximum tree depth.
    #[arg(long, default_value_t = 12)]
    pub max_depth: usize,

    /// Random forest: minimum training rows per leaf.
    #[arg(long, default_value_t = 2)]
    pub min_leaf: usize,
}

#[derive(Debug, Clone, Args)]
pub struct MlpArgs {
    /// MLP: training epochs.
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,

    /// MLP: widths of the two hidden layers.
    #[arg(long, value_delimiter = ',', default_value = "64,64", value_name = "H1,H2")]
    pub hidden: Vec<usize>,

    /// MLP: initial Adam step size.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,

    /// MLP: minibatch size.
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Model family.
    #[arg(long, value_enum, default_value_t = ModelArg::Gpr)]
    pub model: ModelArg,

    /// Half-width of the z·σ interval used for CI metrics.
    #[arg(long, default_value_t = 2.0)]
    pub z: f64,

    #[command(flatten)]
    pub gp: GpArgs,

    #[command(flatten)]
    pub rf: RfArgs,

    #[command(flatten)]
    pub mlp: MlpArgs,

    /// Output model file.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    /// Metrics JSON output (also printed to stdout).
    #[arg(long, value_name = "FILE")]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    /// Design values as a JSON file path or inline JSON object of name → value.
    #[arg(long, value_name = "FILE|JSON")]
    pub design: Option<String>,

    /// Set one design value; repeatable and applied after --design.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    /// Saved model file.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,

    #[command(flatten)]
    pub design: DesignArgs,

    /// Explicit sweep values (comma separated).
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["start", "stop", "count"])]
    pub sweep_values: Option<Vec<f64>>,

    /// Evenly spaced sweep: first value.
    #[arg(long, requires_all = ["stop", "count"])]
    pub start: Option<f64>,

    /// Evenly spaced sweep: last value.
    #[arg(long, requires_all = ["start", "count"])]
    pub stop: Option<f64>,

    /// Evenly spaced sweep: number of points.
    #[arg(long, requires_all = ["start", "stop"])]
    pub count: Option<usize>,

    #[arg(long, default_value_t = 2.0)]
    pub z: f64,

    /// Add the oracle's noise-free curve as a comparison column.
    #[arg(long)]
    pub truth: bool,

    /// Optical constants for --truth (FILE or inline JSON).
    #[arg(long, value_name = "FILE|JSON")]
    pub constants: Option<String>,

    /// Profile CSV output [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Profile JSON output, same body as the service's predict-profile.
    #[arg(long, value_name = "FILE")]
    pub json_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BackpredictArgs {
    /// Reflectance runs CSV.
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,

    /// Design feature to predict.
    #[arg(long, default_value = "wafer_thickness_um")]
    pub target: String,

    /// Wavelength of the requested reflectances (nm).
    #[arg(long, default_value_t = 1050.0)]
    pub wavelength: f64,

    /// Training rows are taken within ±window nm of --wavelength.
    #[arg(long, default_value_t = 50.0)]
    pub window: f64,

    /// Requested reflectance values (comma separated).
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub reflectance: Vec<f64>,

    #[command(flatten)]
    pub design: DesignArgs,

    #[arg(long, default_value_t = 2.0)]
    pub z: f64,

    #[command(flatten)]
    pub gp: GpArgs,

    /// Optical constants for the forward check (FILE or inline JSON).
    #[arg(long, value_name = "FILE|JSON")]
    pub constants: Option<String>,

    #[command(flatten)]
    pub seed: SeedArg,

    /// Report JSON output (also printed to stdout).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Save the inverse GP for serving.
    #[arg(long, value_name = "FILE")]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long, default_value_t = 2.0)]
    pub z: f64,

    #[command(flatten)]
    pub gp: GpArgs,

    #[command(flatten)]
    pub rf: RfArgs,

    #[command(flatten)]
    pub mlp: MlpArgs,

    /// Per-point prediction table (CSV).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Per-model summary (JSON).
    #[arg(long, value_name = "FILE")]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    /// Directory of model files; each `<id>.json` is served as model `<id>`.
    #[arg(long, value_name = "DIR", default_value = "models")]
    pub models_dir: PathBuf,

    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,

    #[arg(long, default_value_t = 8080)]
    pub port: u16,

    /// Origin allowed by CORS (for the web UI).
    #[arg(long, value_name = "ORIGIN")]
    pub cors_origin: Option<String>,
}
