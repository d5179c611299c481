//! Gaussian-process surrogates for solar-cell optical performance curves.
//!
//! The crate covers the full pipeline: an analytic optical [`oracle`] that
//! produces reflectance and generation curves, [`dataset`] flattening and
//! preprocessing, exact GP regression in [`gpr`] on top of the covariance
//! functions in [`kernel`], point-prediction [`baselines`], and versioned
//! model files in [`model_file`].

pub mod baselines;
pub mod dataset;
pub mod error;
pub mod gpr;
pub mod kernel;
pub mod metrics;
pub mod model_file;
pub mod oracle;
pub mod runs_csv;

pub use dataset::{CellDesign, CurveKind, FlatDataset, SimulationRun, Standardizer};
pub use error::{Error, Result};
pub use gpr::{GprModel, OptConfig, Prediction, ProfileWithCI};
pub use kernel::{KernelFamily, KernelSpec};
pub use model_file::{AnyModel, AnyProfile, ModelKind, PointPrediction};
