//! Versioned JSON model files.
//!
//! Every file carries `schema_version`, `kind`, `created_at` and a
//! `content_sha256` over the little-endian bytes of its numeric payload, so
//! a file edited or cut short is reported as corrupt instead of loading into
//! a model with silently different predictions.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::baselines::forest::{ForestModel, Node, RegressionTree};
use crate::baselines::mlp::MlpModel;
use crate::dataset::{sweep_feature_of, Standardizer};
use crate::error::{Error, Result};
use crate::gpr::{profile_rows, GprModel, Prediction};
use crate::kernel::KernelSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gpr,
    Rf,
    Mlp,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Gpr => "gpr",
            ModelKind::Rf => "rf",
            ModelKind::Mlp => "mlp",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gpr" => Ok(ModelKind::Gpr),
            "rf" => Ok(ModelKind::Rf),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(Error::InvalidArgument(format!(
                "unknown model kind '{other}' (expected gpr, rf or mlp)"
            ))),
        }
    }
}

/// Any trained model behind one prediction interface.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    Gpr(GprModel),
    Rf(ForestModel),
    Mlp(MlpModel),
}

/// Mean with the predictive variance when the model provides one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointPrediction {
    pub mean: f64,
    pub variance: Option<f64>,
}

impl From<Prediction> for PointPrediction {
    fn from(p: Prediction) -> Self {
        PointPrediction { mean: p.mean, variance: Some(p.variance) }
    }
}

/// Profile from any model kind; the variance and interval fields are
/// present only for GPs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnyProfile {
    pub sweep_feature: String,
    pub sweep_values: Vec<f64>,
    pub means: Vec<f64>,
    pub variances: Option<Vec<f64>>,
    pub ci_lower: Option<Vec<f64>>,
    pub ci_upper: Option<Vec<f64>>,
    pub z: f64,
}

impl AnyModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            AnyModel::Gpr(_) => ModelKind::Gpr,
            AnyModel::Rf(_) => ModelKind::Rf,
            AnyModel::Mlp(_) => ModelKind::Mlp,
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            AnyModel::Gpr(m) => m.feature_names(),
            AnyModel::Rf(m) => &m.feature_names,
            AnyModel::Mlp(m) => &m.feature_names,
        }
    }

    pub fn target_name(&self) -> &str {
        match self {
            AnyModel::Gpr(m) => m.target_name(),
            AnyModel::Rf(m) => &m.target_name,
            AnyModel::Mlp(m) => &m.target_name,
        }
    }

    pub fn sweep_feature(&self) -> Option<String> {
        sweep_feature_of(self.feature_names())
    }

    pub fn predict(&self, x: &[f64]) -> Result<PointPrediction> {
        match self {
            AnyModel::Gpr(m) => m.predict(x).map(Into::into),
            AnyModel::Rf(m) => Ok(PointPrediction { mean: m.predict(x)?, variance: None }),
            AnyModel::Mlp(m) => Ok(PointPrediction { mean: m.predict(x)?, variance: None }),
        }
    }

    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<PointPrediction>> {
        match self {
            AnyModel::Gpr(m) => Ok(m.predict_batch(xs)?.into_iter().map(Into::into).collect()),
            _ => xs.iter().map(|x| self.predict(x)).collect(),
        }
    }

    /// Orders a name-to-value map into an input row. Every feature must be
    /// present and no others.
    pub fn row_from_features(&self, features: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
        let names = self.feature_names();
        if let Some(extra) = features.keys().find(|k| !names.contains(k)) {
            return Err(crate::dataset::unknown(extra, names.iter().map(String::as_str)));
        }
        let missing: Vec<String> =
            names.iter().filter(|n| !features.contains_key(*n)).cloned().collect();
        if !missing.is_empty() {
            return Err(Error::MissingFeatures { missing, expected: names.to_vec() });
        }
        names
            .iter()
            .map(|n| {
                let v = features[n];
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite(n.clone()))
                }
            })
            .collect()
    }

    pub fn predict_features(&self, features: &BTreeMap<String, f64>) -> Result<PointPrediction> {
        self.predict(&self.row_from_features(features)?)
    }

    /// Sweeps one feature over `grid` with the rest held at `fixed`.
    pub fn predict_profile(
        &self,
        fixed: &BTreeMap<String, f64>,
        sweep_feature: &str,
        grid: &[f64],
        z: f64,
    ) -> Result<AnyProfile> {
        if !(z >= 0.0 && z.is_finite()) {
            return Err(Error::InvalidArgument(format!("z must be >= 0, got {z}")));
        }
        if let AnyModel::Gpr(m) = self {
            let p = m.predict_profile(fixed, sweep_feature, grid, z)?;
            return Ok(AnyProfile {
                sweep_feature: p.sweep_feature,
                sweep_values: p.sweep_values,
                means: p.means,
                variances: Some(p.variances),
                ci_lower: Some(p.ci_lower),
                ci_upper: Some(p.ci_upper),
                z,
            });
        }
        let rows = profile_rows(self.feature_names(), fixed, sweep_feature, grid)?;
        let means = self.predict_batch(&rows)?.into_iter().map(|p| p.mean).collect();
        Ok(AnyProfile {
            sweep_feature: sweep_feature.to_string(),
            sweep_values: grid.to_vec(),
            means,
            variances: None,
            ci_lower: None,
            ci_upper: None,
            z,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    schema_version: u32,
    kind: ModelKind,
    created_at: String,
    feature_names: Vec<String>,
    target_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sweep_feature: Option<String>,
    /// Free-form run metadata (config hash, seed, ...); not checksummed.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    provenance: BTreeMap<String, String>,
    content_sha256: String,
}

#[derive(Serialize, Deserialize)]
struct GprPayload {
    kernel: KernelSpec,
    noise_variance: f64,
    standardizer: Standardizer,
    /// One array per row.
    train_inputs: Vec<Vec<f64>>,
    train_targets: Vec<f64>,
    dual_coeffs: Vec<f64>,
    /// Row `i` holds `L[i][0..=i]`.
    chol_factor: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RfPayload {
    n_trees: usize,
    max_depth: usize,
    min_leaf: usize,
    bootstrap_seed: u64,
    trees: Vec<RegressionTree>,
}

#[derive(Serialize, Deserialize)]
struct MlpPayload {
    layer_sizes: [usize; 4],
    standardizer: Standardizer,
    /// Per layer, one array per output unit.
    weights: Vec<Vec<Vec<f64>>>,
    biases: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct File<P> {
    #[serde(flatten)]
    header: Header,
    #[serde(flatten)]
    payload: P,
}

#[derive(Default)]
struct Hasher(Sha256);

impl Hasher {
    fn f(&mut self, v: f64) {
        self.0.update(v.to_le_bytes());
    }
    fn all<'a>(&mut self, vs: impl IntoIterator<Item = &'a f64>) {
        for v in vs {
            self.f(*v);
        }
    }
    fn standardizer(&mut self, s: &Standardizer) {
        self.all(&s.means);
        self.all(&s.scales);
        self.f(s.target_mean);
        self.f(s.target_scale);
    }
    fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

impl GprPayload {
    fn from_model(m: &GprModel) -> Self {
        let n = m.n_train();
        let l = &m.chol_factor;
        GprPayload {
            kernel: m.kernel.clone(),
            noise_variance: m.noise_variance,
            standardizer: m.standardizer.clone(),
            train_inputs: (0..n)
                .map(|i| m.train_inputs.row(i).iter().copied().collect())
                .collect(),
            train_targets: m.train_targets.as_slice().to_vec(),
            dual_coeffs: m.dual_coeffs.as_slice().to_vec(),
            chol_factor: (0..n).map(|i| (0..=i).map(|j| l[(i, j)]).collect()).collect(),
        }
    }

    fn digest(&self) -> String {
        let mut h = Hasher::default();
        h.f(self.kernel.sigma_f());
        h.all(self.kernel.length_scales());
        if let Some(a) = self.kernel.rq_alpha() {
            h.f(a);
        }
        h.f(self.noise_variance);
        h.standardizer(&self.standardizer);
        for row in &self.train_inputs {
            h.all(row);
        }
        h.all(&self.train_targets);
        h.all(&self.dual_coeffs);
        for row in &self.chol_factor {
            h.all(row);
        }
        h.finish()
    }

    fn into_model(self, header: &Header) -> Result<GprModel> {
        let n = self.train_targets.len();
        let d = self.kernel.dim();
        let shape_ok = n > 0
            && self.train_inputs.len() == n
            && self.train_inputs.iter().all(|r| r.len() == d)
            && self.dual_coeffs.len() == n
            && self.chol_factor.len() == n
            && self.chol_factor.iter().enumerate().all(|(i, r)| r.len() == i + 1)
            && self.standardizer.means.len() == d
            && self.standardizer.scales.len() == d
            && header.feature_names.len() == d;
        if !shape_ok {
            return Err(Error::Corrupt("GP payload shapes are inconsistent".into()));
        }
        if self.chol_factor.iter().enumerate().any(|(i, r)| !(r[i] > 0.0)) {
            return Err(Error::Corrupt("Cholesky factor has a non-positive diagonal".into()));
        }
        let l = DMatrix::from_fn(n, n, |i, j| if j <= i { self.chol_factor[i][j] } else { 0.0 });
        Ok(GprModel {
            kernel: self.kernel,
            noise_variance: self.noise_variance,
            train_inputs: DMatrix::from_fn(n, d, |i, j| self.train_inputs[i][j]),
            train_targets: DVector::from_vec(self.train_targets),
            chol_factor: l,
            dual_coeffs: DVector::from_vec(self.dual_coeffs),
            standardizer: self.standardizer,
            feature_names: header.feature_names.clone(),
            target_name: header.target_name.clone(),
            sweep_feature: sweep_feature_of(&header.feature_names),
        })
    }
}

fn hash_nodes(h: &mut Hasher, nodes: &[Node]) {
    for node in nodes {
        match node {
            Node::Leaf { value, count } => {
                h.f(*value);
                h.f(*count as f64);
            }
            Node::Split { feature, threshold, left, right } => {
                h.f(*feature as f64);
                h.f(*threshold);
                h.f(*left as f64);
                h.f(*right as f64);
            }
        }
    }
}

impl RfPayload {
    fn digest(&self) -> String {
        let mut h = Hasher::default();
        for t in &self.trees {
            h.f(t.nodes.len() as f64);
            hash_nodes(&mut h, &t.nodes);
        }
        h.finish()
    }

    fn check(&self, d: usize) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::Corrupt("forest has no trees".into()));
        }
        for t in &self.trees {
            let n = t.nodes.len();
            let ok = n > 0
                && t.nodes.iter().all(|node| match node {
                    Node::Leaf { .. } => true,
                    Node::Split { feature, left, right, .. } => {
                        *feature < d && *left < n && *right < n
                    }
                });
            if !ok {
                return Err(Error::Corrupt("tree node references are out of range".into()));
            }
        }
        Ok(())
    }
}

impl MlpPayload {
    fn from_model(m: &MlpModel) -> Self {
        MlpPayload {
            layer_sizes: m.layer_sizes,
            standardizer: m.standardizer.clone(),
            weights: m
                .weights
                .iter()
                .map(|w| (0..w.nrows()).map(|i| w.row(i).iter().copied().collect()).collect())
                .collect(),
            biases: m.biases.iter().map(|b| b.as_slice().to_vec()).collect(),
        }
    }

    fn digest(&self) -> String {
        let mut h = Hasher::default();
        h.standardizer(&self.standardizer);
        for (w, b) in self.weights.iter().zip(&self.biases) {
            for row in w {
                h.all(row);
            }
            h.all(b);
        }
        h.finish()
    }

    fn into_model(self, header: &Header) -> Result<MlpModel> {
        let s = self.layer_sizes;
        let shape_ok = self.weights.len() == 3
            && self.biases.len() == 3
            && (0..3).all(|l| {
                self.weights[l].len() == s[l + 1]
                    && self.weights[l].iter().all(|r| r.len() == s[l])
                    && self.biases[l].len() == s[l + 1]
            })
            && s[3] == 1
            && header.feature_names.len() == s[0]
            && self.standardizer.means.len() == s[0];
        if !shape_ok {
            return Err(Error::Corrupt("MLP payload shapes are inconsistent".into()));
        }
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(l, w)| DMatrix::from_fn(s[l + 1], s[l], |i, j| w[i][j]))
            .collect();
        Ok(MlpModel {
            layer_sizes: s,
            weights,
            biases: self.biases.into_iter().map(DVector::from_vec).collect(),
            standardizer: self.standardizer,
            feature_names: header.feature_names.clone(),
            target_name: header.target_name.clone(),
        })
    }
}

fn make_header(
    model: &AnyModel,
    digest: String,
    provenance: &BTreeMap<String, String>,
) -> Header {
    Header {
        schema_version: SCHEMA_VERSION,
        kind: model.kind(),
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        feature_names: model.feature_names().to_vec(),
        target_name: model.target_name().to_string(),
        sweep_feature: model.sweep_feature(),
        provenance: provenance.clone(),
        content_sha256: digest,
    }
}

/// Serializes a model to its JSON document.
pub fn to_json(model: &AnyModel) -> Result<String> {
    to_json_with(model, &BTreeMap::new())
}

/// As [`to_json`], recording `provenance` in the header.
pub fn to_json_with(model: &AnyModel, provenance: &BTreeMap<String, String>) -> Result<String> {
    let header = |model: &AnyModel, digest: String| make_header(model, digest, provenance);
    let s = match model {
        AnyModel::Gpr(m) => {
            let payload = GprPayload::from_model(m);
            let header = header(model, payload.digest());
            serde_json::to_string_pretty(&File { header, payload })?
        }
        AnyModel::Rf(m) => {
            let payload = RfPayload {
                n_trees: m.n_trees,
                max_depth: m.max_depth,
                min_leaf: m.min_leaf,
                bootstrap_seed: m.bootstrap_seed,
                trees: m.trees.clone(),
            };
            let header = header(model, payload.digest());
            serde_json::to_string_pretty(&File { header, payload })?
        }
        AnyModel::Mlp(m) => {
            let payload = MlpPayload::from_model(m);
            let header = header(model, payload.digest());
            serde_json::to_string_pretty(&File { header, payload })?
        }
    };
    Ok(s)
}

fn corrupt(e: serde_json::Error) -> Error {
    Error::Corrupt(e.to_string())
}

fn verify(header: &Header, digest: String) -> Result<()> {
    if header.content_sha256 != digest {
        return Err(Error::Corrupt(format!(
            "content checksum mismatch: file says {}, payload hashes to {digest}",
            header.content_sha256
        )));
    }
    Ok(())
}

/// Parses a model document, checking version, checksum and shapes.
pub fn from_json(text: &str) -> Result<AnyModel> {
    let value: Value = serde_json::from_str(text).map_err(corrupt)?;
    let version = value
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Corrupt("missing or non-integer schema_version".into()))?;
    if version != SCHEMA_VERSION as u64 {
        return Err(Error::SchemaVersion {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: SCHEMA_VERSION,
        });
    }
    let kind: ModelKind = value
        .get("kind")
        .cloned()
        .ok_or_else(|| Error::Corrupt("missing kind".into()))
        .and_then(|k| serde_json::from_value(k).map_err(corrupt))?;
    match kind {
        ModelKind::Gpr => {
            let f: File<GprPayload> = serde_json::from_value(value).map_err(corrupt)?;
            verify(&f.header, f.payload.digest())?;
            Ok(AnyModel::Gpr(f.payload.into_model(&f.header)?))
        }
        ModelKind::Rf => {
            let f: File<RfPayload> = serde_json::from_value(value).map_err(corrupt)?;
            verify(&f.header, f.payload.digest())?;
            f.payload.check(f.header.feature_names.len())?;
            let p = f.payload;
            Ok(AnyModel::Rf(ForestModel {
                trees: p.trees,
                n_trees: p.n_trees,
                max_depth: p.max_depth,
                min_leaf: p.min_leaf,
                bootstrap_seed: p.bootstrap_seed,
                feature_names: f.header.feature_names,
                target_name: f.header.target_name,
            }))
        }
        ModelKind::Mlp => {
            let f: File<MlpPayload> = serde_json::from_value(value).map_err(corrupt)?;
            verify(&f.header, f.payload.digest())?;
            Ok(AnyModel::Mlp(f.payload.into_model(&f.header)?))
        }
    }
}

/// Writes to a sibling temporary file and renames it into place.
pub fn save(model: &AnyModel, path: &Path) -> Result<()> {
    save_with(model, path, &BTreeMap::new())
}

pub fn save_with(
    model: &AnyModel,
    path: &Path,
    provenance: &BTreeMap<String, String>,
) -> Result<()> {
    let text = to_json_with(model, provenance)?;
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<AnyModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

pub fn save_gpr(model: &GprModel, path: &Path) -> Result<()> {
    save(&AnyModel::Gpr(model.clone()), path)
}

pub fn load_gpr(path: &Path) -> Result<GprModel> {
    match load(path)? {
        AnyModel::Gpr(m) => Ok(m),
        other => Err(Error::InvalidArgument(format!(
            "{} holds a {} model, not a GP",
            path.display(),
            other.kind()
        ))),
    }
}
