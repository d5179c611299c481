//! Mean-only regressors used as points of comparison for the GP. Neither
//! model produces a predictive variance.

pub mod forest;
pub mod mlp;

pub use forest::{ForestConfig, ForestModel};
pub use mlp::{MlpConfig, MlpModel};
