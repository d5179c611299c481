//! Simulation runs, the flattened training table built from them, and the
//! preprocessing applied before fitting.
//!
//! A run is one simulated curve (reflectance against wavelength, or optical
//! generation against depth) for one [`CellDesign`]. Flattening turns a run
//! with `s` sweep points into `s` rows whose inputs are the six design values
//! followed by the sweep value.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WAFER_THICKNESS: &str = "wafer_thickness_um";
pub const SUBSTRATE_DOPING: &str = "substrate_doping_cm3";
pub const PYRAMID_ANGLE: &str = "pyramid_angle_deg";
pub const REAR_CONTACT_THICKNESS: &str = "rear_contact_thickness_um";
pub const ARC_THICKNESS: &str = "arc_thickness_nm";
pub const BACK_REFLECTIVITY: &str = "back_reflectivity_frac";

/// Design parameter names in canonical column order.
pub const DESIGN_FEATURES: [&str; 6] = [
    WAFER_THICKNESS,
    SUBSTRATE_DOPING,
    PYRAMID_ANGLE,
    REAR_CONTACT_THICKNESS,
    ARC_THICKNESS,
    BACK_REFLECTIVITY,
];

pub fn is_design_feature(name: &str) -> bool {
    DESIGN_FEATURES.contains(&name)
}

/// The six varied simulation inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellDesign {
    pub wafer_thickness_um: f64,
    pub substrate_doping_cm3: f64,
    pub pyramid_angle_deg: f64,
    pub rear_contact_thickness_um: f64,
    pub arc_thickness_nm: f64,
    pub back_reflectivity_frac: f64,
}

impl CellDesign {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, v: f64, rule: &str| {
            Err(Error::InvalidArgument(format!("{name} = {v} violates {rule}")))
        };
        let v = self.to_array();
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(DESIGN_FEATURES[i].to_string()));
        }
        if self.wafer_thickness_um <= 0.0 {
            return bad(WAFER_THICKNESS, self.wafer_thickness_um, "> 0");
        }
        if self.substrate_doping_cm3 <= 0.0 {
            return bad(SUBSTRATE_DOPING, self.substrate_doping_cm3, "> 0");
        }
        if !(self.pyramid_angle_deg > 0.0 && self.pyramid_angle_deg < 90.0) {
            return bad(PYRAMID_ANGLE, self.pyramid_angle_deg, "0 < angle < 90");
        }
        if self.rear_contact_thickness_um < 0.0 {
            return bad(REAR_CONTACT_THICKNESS, self.rear_contact_thickness_um, ">= 0");
        }
        if self.arc_thickness_nm <= 0.0 {
            return bad(ARC_THICKNESS, self.arc_thickness_nm, "> 0");
        }
        if !(0.0..=1.0).contains(&self.back_reflectivity_frac) {
            return bad(BACK_REFLECTIVITY, self.back_reflectivity_frac, "0 <= r <= 1");
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.wafer_thickness_um,
            self.substrate_doping_cm3,
            self.pyramid_angle_deg,
            self.rear_contact_thickness_um,
            self.arc_thickness_nm,
            self.back_reflectivity_frac,
        ]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        CellDesign {
            wafer_thickness_um: v[0],
            substrate_doping_cm3: v[1],
            pyramid_angle_deg: v[2],
            rear_contact_thickness_um: v[3],
            arc_thickness_nm: v[4],
            back_reflectivity_frac: v[5],
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        DESIGN_FEATURES
            .iter()
            .position(|f| *f == name)
            .map(|i| self.to_array()[i])
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let i = DESIGN_FEATURES
            .iter()
            .position(|f| *f == name)
            .ok_or_else(|| unknown(name, DESIGN_FEATURES.iter().copied()))?;
        let mut v = self.to_array();
        v[i] = value;
        *self = CellDesign::from_array(v);
        Ok(())
    }

    /// Name/value pairs in canonical order.
    pub fn to_feature_map(&self) -> BTreeMap<String, f64> {
        DESIGN_FEATURES
            .iter()
            .zip(self.to_array())
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }

    /// Builds a design from a map holding all six names (extra keys ignored).
    pub fn from_feature_map(map: &BTreeMap<String, f64>) -> Result<Self> {
        let missing: Vec<String> = DESIGN_FEATURES
            .iter()
            .filter(|f| !map.contains_key(**f))
            .map(|f| f.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingFeatures {
                missing,
                expected: DESIGN_FEATURES.iter().map(|s| s.to_string()).collect(),
            });
        }
        let mut v = [0.0; 6];
        for (slot, name) in v.iter_mut().zip(DESIGN_FEATURES) {
            *slot = map[name];
        }
        let design = CellDesign::from_array(v);
        design.validate()?;
        Ok(design)
    }
}

pub(crate) fn unknown<'a>(name: &str, expected: impl IntoIterator<Item = &'a str>) -> Error {
    Error::UnknownFeature {
        name: name.to_string(),
        expected: expected.into_iter().map(str::to_string).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Reflectance,
    Generation,
}

impl CurveKind {
    /// Name of the swept input once flattened.
    pub fn sweep_name(self) -> &'static str {
        match self {
            CurveKind::Reflectance => "wavelength_nm",
            CurveKind::Generation => "depth_um",
        }
    }

    pub fn target_name(self) -> &'static str {
        match self {
            CurveKind::Reflectance => "reflectance",
            CurveKind::Generation => "generation",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Reflectance => "reflectance",
            CurveKind::Generation => "generation",
        }
    }

    /// Recovers the curve kind from a sweep feature name.
    pub fn from_sweep_name(name: &str) -> Option<Self> {
        match name {
            "wavelength_nm" => Some(CurveKind::Reflectance),
            "depth_um" => Some(CurveKind::Generation),
            _ => None,
        }
    }
}

impl std::str::FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reflectance" => Ok(CurveKind::Reflectance),
            "generation" => Ok(CurveKind::Generation),
            other => Err(Error::InvalidArgument(format!(
                "unknown curve kind `{other}` (expected reflectance or generation)"
            ))),
        }
    }
}

/// The first feature name that is a known sweep variable.
pub fn sweep_feature_of(names: &[String]) -> Option<String> {
    names
        .iter()
        .find(|n| CurveKind::from_sweep_name(n).is_some())
        .cloned()
}

/// One simulated curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub design: CellDesign,
    pub curve_kind: CurveKind,
    pub sweep: Vec<f64>,
    pub values: Vec<f64>,
}

impl SimulationRun {
    pub fn validate(&self) -> Result<()> {
        self.design.validate()?;
        if self.sweep.is_empty() {
            return Err(Error::EmptyInput("run has no sweep points".into()));
        }
        if self.sweep.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.sweep.len(),
                got: self.values.len(),
            });
        }
        if self.sweep.iter().chain(&self.values).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("run sweep/values".into()));
        }
        if let Some(w) = self.sweep.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!(
                "sweep not strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        match self.curve_kind {
            CurveKind::Generation => {
                let last = *self.sweep.last().unwrap();
                if (last - self.design.wafer_thickness_um).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "last depth point {last} differs from wafer thickness {}",
                        self.design.wafer_thickness_um
                    )));
                }
                if let Some(v) = self.values.iter().find(|v| **v < 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "negative generation value {v}"
                    )));
                }
            }
            CurveKind::Reflectance => {
                if let Some(v) = self.values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                    return Err(Error::InvalidArgument(format!(
                        "reflectance {v} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Row-per-sample training table.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatDataset {
    /// n×d
    pub inputs: DMatrix<f64>,
    pub targets: Vec<f64>,
    pub feature_names: Vec<String>,
    pub target_name: String,
    /// Index of the originating run for every row.
    pub run_ids: Vec<usize>,
}

impl FlatDataset {
    pub fn new(
        inputs: DMatrix<f64>,
        targets: Vec<f64>,
        feature_names: Vec<String>,
        target_name: impl Into<String>,
        run_ids: Vec<usize>,
    ) -> Result<Self> {
        let (n, d) = inputs.shape();
        if targets.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: targets.len(),
            });
        }
        if feature_names.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: feature_names.len(),
            });
        }
        if run_ids.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: run_ids.len(),
            });
        }
        if inputs.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset".into()));
        }
        Ok(FlatDataset {
            inputs,
            targets,
            feature_names,
            target_name: target_name.into(),
            run_ids,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.inputs.row(i).iter().copied().collect()
    }

    pub fn feature_index(&self, name: &str) -> Result<usize> {
        self.feature_names
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| unknown(name, self.feature_names.iter().map(String::as_str)))
    }

    /// Rows at `indices`, in that order.
    pub fn take_rows(&self, indices: &[usize]) -> FlatDataset {
        let d = self.dim();
        let inputs = DMatrix::from_fn(indices.len(), d, |i, k| self.inputs[(indices[i], k)]);
        FlatDataset {
            inputs,
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
            run_ids: indices.iter().map(|&i| self.run_ids[i]).collect(),
        }
    }

    /// Keeps rows for which `keep(row, target)` holds.
    pub fn filter_rows(&self, mut keep: impl FnMut(&[f64], f64) -> bool) -> FlatDataset {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| keep(&self.row(i), self.targets[i]))
            .collect();
        self.take_rows(&idx)
    }

    /// Projects onto the named columns, in the given order.
    pub fn select_features<S: AsRef<str>>(&self, names: &[S]) -> Result<FlatDataset> {
        if names.is_empty() {
            return Err(Error::InvalidArgument("no features selected".into()));
        }
        let cols = names
            .iter()
            .map(|n| self.feature_index(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let inputs = DMatrix::from_fn(self.len(), cols.len(), |i, k| self.inputs[(i, cols[k])]);
        Ok(FlatDataset {
            inputs,
            targets: self.targets.clone(),
            feature_names: names.iter().map(|n| n.as_ref().to_string()).collect(),
            target_name: self.target_name.clone(),
            run_ids: self.run_ids.clone(),
        })
    }

    /// Uniform random subset of at most `k` rows (original order kept).
    pub fn subsample(&self, k: usize, seed: u64) -> FlatDataset {
        if k >= self.len() {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut rng);
        idx.truncate(k);
        idx.sort_unstable();
        self.take_rows(&idx)
    }

    /// Concatenates datasets with identical schemas.
    pub fn concat(parts: &[FlatDataset]) -> Result<FlatDataset> {
        let first = parts
            .first()
            .ok_or_else(|| Error::EmptyInput("nothing to concatenate".into()))?;
        let n: usize = parts.iter().map(FlatDataset::len).sum();
        let d = first.dim();
        let mut inputs = DMatrix::zeros(n, d);
        let mut targets = Vec::with_capacity(n);
        let mut run_ids = Vec::with_capacity(n);
        let mut at = 0;
        for p in parts {
            if p.feature_names != first.feature_names || p.target_name != first.target_name {
                return Err(Error::InvalidArgument("datasets have different schemas".into()));
            }
            inputs.rows_mut(at, p.len()).copy_from(&p.inputs);
            targets.extend_from_slice(&p.targets);
            run_ids.extend_from_slice(&p.run_ids);
            at += p.len();
        }
        FlatDataset::new(
            inputs,
            targets,
            first.feature_names.clone(),
            first.target_name.clone(),
            run_ids,
        )
    }

    /// Inverse of [`flatten`] for a dataset in canonical flattened layout.
    pub fn to_runs(&self, kind: CurveKind) -> Result<Vec<SimulationRun>> {
        let mut expected: Vec<&str> = DESIGN_FEATURES.to_vec();
        expected.push(kind.sweep_name());
        if self.feature_names != expected || self.target_name != kind.target_name() {
            return Err(Error::InvalidArgument(
                "dataset is not in canonical flattened layout".into(),
            ));
        }
        let mut runs: Vec<SimulationRun> = Vec::new();
        let mut last_id = None;
        for i in 0..self.len() {
            let row = self.row(i);
            if last_id != Some(self.run_ids[i]) {
                let mut design = [0.0; 6];
                design.copy_from_slice(&row[..6]);
                runs.push(SimulationRun {
                    design: CellDesign::from_array(design),
                    curve_kind: kind,
                    sweep: Vec::new(),
                    values: Vec::new(),
                });
                last_id = Some(self.run_ids[i]);
            }
            let run = runs.last_mut().unwrap();
            run.sweep.push(row[6]);
            run.values.push(self.targets[i]);
        }
        Ok(runs)
    }
}

/// Flattens runs into one row per sweep point: six design values then the
/// sweep value as the seventh feature.
pub fn flatten(runs: &[SimulationRun]) -> Result<FlatDataset> {
    let first = runs
        .first()
        .ok_or_else(|| Error::EmptyInput("no simulation runs".into()))?;
    let kind = first.curve_kind;
    let mut n = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.curve_kind != kind {
            return Err(Error::InvalidArgument(format!(
                "run {i} is {:?} but run 0 is {:?}",
                r.curve_kind, kind
            )));
        }
        r.validate()
            .map_err(|e| Error::InvalidArgument(format!("run {i}: {e}")))?;
        n += r.sweep.len();
    }
    let mut inputs = DMatrix::zeros(n, 7);
    let mut targets = Vec::with_capacity(n);
    let mut run_ids = Vec::with_capacity(n);
    let mut at = 0;
    for (id, r) in runs.iter().enumerate() {
        let design = r.design.to_array();
        for (s, v) in r.sweep.iter().zip(&r.values) {
            for (k, x) in design.iter().enumerate() {
                inputs[(at, k)] = *x;
            }
            inputs[(at, 6)] = *s;
            targets.push(*v);
            run_ids.push(id);
            at += 1;
        }
    }
    let mut names: Vec<String> = DESIGN_FEATURES.iter().map(|s| s.to_string()).collect();
    names.push(kind.sweep_name().to_string());
    FlatDataset::new(inputs, targets, names, kind.target_name(), run_ids)
}

/// Per-feature affine map to zero mean and unit (population) variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub target_mean: f64,
    pub target_scale: f64,
    /// Features whose column was constant; their scale is forced to 1.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constant_features: Vec<usize>,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl Standardizer {
    pub fn fit(data: &FlatDataset) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "standardization needs at least 2 rows, got {}",
                data.len()
            )));
        }
        let mut means = Vec::with_capacity(data.dim());
        let mut scales = Vec::with_capacity(data.dim());
        let mut constant_features = Vec::new();
        for k in 0..data.dim() {
            let (m, s) = mean_std(data.inputs.column(k).iter().copied());
            means.push(m);
            if s > 1e-12 * m.abs().max(1.0) {
                scales.push(s);
            } else {
                scales.push(1.0);
                constant_features.push(k);
            }
        }
        let (target_mean, ts) = mean_std(data.targets.iter().copied());
        let target_scale = if ts > 1e-12 * target_mean.abs().max(1.0) {
            ts
        } else {
            1.0
        };
        for k in &constant_features {
            log::warn!(
                "feature `{}` is constant; leaving it unscaled",
                data.feature_names[*k]
            );
        }
        Ok(Standardizer {
            means,
            scales,
            target_mean,
            target_scale,
            constant_features,
        })
    }

    /// Identity map over `d` features.
    pub fn identity(d: usize) -> Self {
        Standardizer {
            means: vec![0.0; d],
            scales: vec![1.0; d],
            target_mean: 0.0,
            target_scale: 1.0,
            constant_features: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn has_constant_features(&self) -> bool {
        !self.constant_features.is_empty()
    }

    pub fn apply_row(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn invert_row(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }

    pub fn apply_inputs(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), x.ncols(), |i, k| {
            (x[(i, k)] - self.means[k]) / self.scales[k]
        })
    }

    pub fn invert_inputs(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(z.nrows(), z.ncols(), |i, k| {
            z[(i, k)] * self.scales[k] + self.means[k]
        })
    }

    pub fn apply_target(&self, y: f64) -> f64 {
        (y - self.target_mean) / self.target_scale
    }

    pub fn invert_target(&self, z: f64) -> f64 {
        z * self.target_scale + self.target_mean
    }

    pub fn invert_variance(&self, v: f64) -> f64 {
        v * self.target_scale * self.target_scale
    }

    pub fn apply(&self, data: &FlatDataset) -> FlatDataset {
        FlatDataset {
            inputs: self.apply_inputs(&data.inputs),
            targets: data.targets.iter().map(|&y| self.apply_target(y)).collect(),
            feature_names: data.feature_names.clone(),
            target_name: data.target_name.clone(),
            run_ids: data.run_ids.clone(),
        }
    }

    pub fn invert(&self, data: &FlatDataset) -> FlatDataset {
        FlatDataset {
            inputs: self.invert_inputs(&data.inputs),
            targets: data.targets.iter().map(|&z| self.invert_target(z)).collect(),
            feature_names: data.feature_names.clone(),
            target_name: data.target_name.clone(),
            run_ids: data.run_ids.clone(),
        }
    }
}

/// Random train/test partition. With `group_by_run`, whole runs go to one
/// side; the test side gets `round(test_fraction · groups)` groups.
pub fn split(
    data: &FlatDataset,
    test_fraction: f64,
    seed: u64,
    group_by_run: bool,
) -> Result<(FlatDataset, FlatDataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (train_idx, test_idx): (Vec<usize>, Vec<usize>) = if group_by_run {
        let mut groups: Vec<usize> = data.run_ids.clone();
        groups.sort_unstable();
        groups.dedup();
        groups.shuffle(&mut rng);
        let n_test = (test_fraction * groups.len() as f64).round() as usize;
        let test_groups: HashMap<usize, ()> =
            groups[..n_test].iter().map(|g| (*g, ())).collect();
        (0..data.len()).partition(|i| !test_groups.contains_key(&data.run_ids[*i]))
    } else {
        let mut idx: Vec<usize> = (0..data.len()).collect();
        idx.shuffle(&mut rng);
        let n_test = (test_fraction * data.len() as f64).round() as usize;
        let mut test: Vec<usize> = idx[..n_test].to_vec();
        let mut train: Vec<usize> = idx[n_test..].to_vec();
        test.sort_unstable();
        train.sort_unstable();
        (train, test)
    };
    Ok((data.take_rows(&train_idx), data.take_rows(&test_idx)))
}

/// Exchanges the named input column with the target column.
///
/// Applying the same swap twice (with the old target's name) restores the
/// original dataset exactly.
pub fn make_inverse_dataset(data: &FlatDataset, new_target: &str) -> Result<FlatDataset> {
    let k = data.feature_index(new_target)?;
    let mut inputs = data.inputs.clone();
    let mut targets = data.targets.clone();
    for i in 0..data.len() {
        std::mem::swap(&mut inputs[(i, k)], &mut targets[i]);
    }
    let mut feature_names = data.feature_names.clone();
    let target_name = std::mem::replace(&mut feature_names[k], data.target_name.clone());
    Ok(FlatDataset {
        inputs,
        targets,
        feature_names,
        target_name,
        run_ids: data.run_ids.clone(),
    })
}
