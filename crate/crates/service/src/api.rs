//! Request and response bodies. Each has a matching file under `schemas/`.

use std::collections::BTreeMap;

use gpsurr_core::gpr::linspace;
use serde::{Deserialize, Serialize};

/// Upper bound on points per sweep request.
pub const MAX_SWEEP_POINTS: usize = 10_000;

fn default_z() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub models_loaded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub model_id: String,
    pub kind: String,
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub sweep_feature: Option<String>,
}

/// Either explicit `values` or a `start`/`stop`/`count` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub feature: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

/// A request field that failed validation.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        FieldError { field: field.into(), message: message.into() }
    }
}

impl SweepSpec {
    pub fn values(feature: &str, values: Vec<f64>) -> Self {
        SweepSpec { feature: feature.into(), values: Some(values), start: None, stop: None, count: None }
    }

    pub fn range(feature: &str, start: f64, stop: f64, count: usize) -> Self {
        SweepSpec {
            feature: feature.into(),
            values: None,
            start: Some(start),
            stop: Some(stop),
            count: Some(count),
        }
    }

    pub fn grid(&self) -> Result<Vec<f64>, FieldError> {
        let range = (self.start, self.stop, self.count);
        let grid = match (&self.values, range) {
            (Some(v), (None, None, None)) => {
                if v.len() > MAX_SWEEP_POINTS {
                    return Err(FieldError::new(
                        "sweep.values",
                        format!("at most {MAX_SWEEP_POINTS} sweep points allowed, got {}", v.len()),
                    ));
                }
                v.clone()
            }
            (None, (Some(start), Some(stop), Some(count))) => {
                if count > MAX_SWEEP_POINTS {
                    return Err(FieldError::new(
                        "sweep.count",
                        format!("at most {MAX_SWEEP_POINTS} sweep points allowed, got {count}"),
                    ));
                }
                linspace(start, stop, count).map_err(|e| FieldError::new("sweep", e.to_string()))?
            }
            _ => {
                return Err(FieldError::new(
                    "sweep",
                    "give either `values` or all of `start`, `stop` and `count`",
                ))
            }
        };
        if grid.is_empty() {
            return Err(FieldError::new("sweep.values", "sweep grid is empty"));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileRequest {
    pub fixed: BTreeMap<String, f64>,
    pub sweep: SweepSpec,
    #[serde(default = "default_z")]
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileResponse {
    pub model_id: String,
    pub sweep_feature: String,
    pub sweep_values: Vec<f64>,
    pub means: Vec<f64>,
    pub variances: Option<Vec<f64>>,
    pub ci_lower: Option<Vec<f64>>,
    pub ci_upper: Option<Vec<f64>>,
    pub z: f64,
}

impl ProfileResponse {
    pub fn new(model_id: &str, p: gpsurr_core::AnyProfile) -> Self {
        ProfileResponse {
            model_id: model_id.into(),
            sweep_feature: p.sweep_feature,
            sweep_values: p.sweep_values,
            means: p.means,
            variances: p.variances,
            ci_lower: p.ci_lower,
            ci_upper: p.ci_upper,
            z: p.z,
        }
    }
}

/// `fixed` names every input of the inverse model, including the desired
/// performance value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackPredictRequest {
    pub fixed: BTreeMap<String, f64>,
    #[serde(default = "default_z")]
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackPredictResponse {
    pub model_id: String,
    pub target_name: String,
    pub mean: f64,
    pub variance: Option<f64>,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incident_id: Option<String>,
}
