//! Analytic optical simulator used as ground truth.
//!
//! Reflectance combines a single-layer thin-film front surface (air / ARC /
//! Si at normal incidence) scaled by a texture capture factor, plus light
//! that escapes after a double pass through the wafer and a rear reflection.
//! Generation sums Beer-Lambert absorption over the wavelength grid with one
//! rear reflection. The rear contact thickness never enters either formula.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{CellDesign, CurveKind, SimulationRun, DESIGN_FEATURES};
use crate::error::{Error, Result};

pub const ORACLE_VERSION: &str = "1";

/// Largest database (in flattened rows) `generate_database` will build.
pub const MAX_ROWS: usize = 1_000_000;

/// Pyramid base angle of an ideal KOH-etched (111) facet.
pub const FACET_ANGLE_DEG: f64 = 54.74;

const FCA_COEFF: f64 = 5e-18;
const UM_TO_CM: f64 = 1e-4;

const DEFAULT_ABSORPTION: &str = include_str!("../data/si_absorption.csv");

fn default_absorption_table() -> Vec<(f64, f64)> {
    DEFAULT_ABSORPTION
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("wavelength"))
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (a, b) = l.split_once(',').expect("absorption table row");
            (a.trim().parse().unwrap(), b.trim().parse().unwrap())
        })
        .collect()
}

/// 300–1150 nm in 50 nm steps (18 points).
pub fn default_wavelengths() -> Vec<f64> {
    (0..18).map(|i| 300.0 + 50.0 * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticalConstants {
    pub si_refractive_index: f64,
    pub arc_refractive_index: f64,
    /// (wavelength nm, α cm⁻¹), strictly increasing wavelength.
    pub absorption_table: Vec<(f64, f64)>,
    pub photon_flux_scale: f64,
}

impl Default for OpticalConstants {
    fn default() -> Self {
        OpticalConstants {
            si_refractive_index: 3.8,
            arc_refractive_index: 2.0,
            absorption_table: default_absorption_table(),
            photon_flux_scale: 1e17,
        }
    }
}

impl OpticalConstants {
    pub fn validate(&self) -> Result<()> {
        let t = &self.absorption_table;
        if t.len() < 2 {
            return Err(Error::InvalidArgument(
                "absorption_table needs at least 2 entries".into(),
            ));
        }
        if t.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidArgument(
                "absorption_table wavelengths must strictly increase".into(),
            ));
        }
        if t.iter().any(|(_, a)| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidArgument(
                "absorption_table coefficients must be > 0".into(),
            ));
        }
        for (name, v) in [
            ("si_refractive_index", self.si_refractive_index),
            ("arc_refractive_index", self.arc_refractive_index),
            ("photon_flux_scale", self.photon_flux_scale),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be > 0")));
            }
        }
        Ok(())
    }

    pub fn wavelength_range(&self) -> (f64, f64) {
        (
            self.absorption_table[0].0,
            self.absorption_table[self.absorption_table.len() - 1].0,
        )
    }

    fn check_wavelength(&self, wl: f64) -> Result<()> {
        let (lo, hi) = self.wavelength_range();
        if wl.is_finite() && wl >= lo && wl <= hi {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "wavelength {wl} nm outside absorption table [{lo}, {hi}]"
            )))
        }
    }

    /// Band-to-band absorption, log-linear between table entries.
    pub fn band_absorption(&self, wl: f64) -> Result<f64> {
        self.check_wavelength(wl)?;
        let t = &self.absorption_table;
        let i = t.partition_point(|(w, _)| *w <= wl).clamp(1, t.len() - 1);
        let (w0, a0) = t[i - 1];
        let (w1, a1) = t[i];
        let f = (wl - w0) / (w1 - w0);
        if f == 1.0 {
            return Ok(a1);
        }
        Ok(a0 * (a1 / a0).powf(f))
    }

    /// Band absorption plus free-carrier absorption `5e-18 · N · (λ/µm)²`.
    pub fn absorption(&self, wl: f64, doping_cm3: f64) -> Result<f64> {
        let fca = FCA_COEFF * doping_cm3 * (wl / 1000.0).powi(2);
        Ok(self.band_absorption(wl)? + fca)
    }

    /// Relative photon flux: 5778 K black-body photon spectrum, unit peak,
    /// times `photon_flux_scale`.
    pub fn photon_flux(&self, wl: f64) -> f64 {
        // hc/k in nm·K
        const HC_K: f64 = 1.438_777e7;
        const T: f64 = 5778.0;
        let shape = |l: f64| l.powi(-4) / ((HC_K / (l * T)).exp() - 1.0);
        // photon spectral peak sits at hc/(3.92 kT)
        let peak = HC_K / (3.920_690 * T);
        self.photon_flux_scale * shape(wl) / shape(peak)
    }
}

/// Normal-incidence reflectance of air / film / substrate via the
/// characteristic matrix of the film.
pub fn thin_film_reflectance(n_film: f64, n_sub: f64, thickness_nm: f64, wl: f64) -> f64 {
    let delta = 2.0 * PI * n_film * thickness_nm / wl;
    let (s, c) = delta.sin_cos();
    let i = Complex64::i();
    let eta0 = 1.0;
    // [B, C] = M · [1, η_sub]
    let b = Complex64::new(c, 0.0) + i * (s * n_sub / n_film);
    let cc = i * (n_film * s) + Complex64::new(n_sub * c, 0.0);
    let r = (b * eta0 - cc) / (b * eta0 + cc);
    r.norm_sqr()
}

/// Fraction of front-surface reflection surviving the texture, a linear ramp
/// from 1 (flat) to 0.25 at the facet angle, held there beyond it.
pub fn texture_factor(pyramid_angle_deg: f64) -> f64 {
    let f = (pyramid_angle_deg / FACET_ANGLE_DEG).clamp(0.0, 1.0);
    1.0 - 0.75 * f
}

pub fn path_factor(pyramid_angle_deg: f64) -> f64 {
    1.0 / pyramid_angle_deg.to_radians().cos()
}

/// Textured front-surface reflectance (no rear contribution).
pub fn front_reflectance(design: &CellDesign, wl: f64, c: &OpticalConstants) -> f64 {
    texture_factor(design.pyramid_angle_deg)
        * thin_film_reflectance(
            c.arc_refractive_index,
            c.si_refractive_index,
            design.arc_thickness_nm,
            wl,
        )
}

/// Light returned through the front after a double pass and rear reflection.
pub fn escape_reflectance(design: &CellDesign, wl: f64, c: &OpticalConstants) -> Result<f64> {
    let alpha = c.absorption(wl, design.substrate_doping_cm3)?;
    let rf = front_reflectance(design, wl, c);
    let f = path_factor(design.pyramid_angle_deg);
    let w = design.wafer_thickness_um * UM_TO_CM;
    Ok((1.0 - rf).powi(2) * design.back_reflectivity_frac * (-2.0 * alpha * w * f).exp())
}

pub fn reflectance_at(design: &CellDesign, wl: f64, c: &OpticalConstants) -> Result<f64> {
    let r = front_reflectance(design, wl, c) + escape_reflectance(design, wl, c)?;
    Ok(r.clamp(0.0, 1.0))
}

pub fn simulate_reflectance(
    design: &CellDesign,
    wavelengths: &[f64],
    c: &OpticalConstants,
) -> Result<SimulationRun> {
    design.validate()?;
    let values = wavelengths
        .iter()
        .map(|&wl| reflectance_at(design, wl, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationRun {
        design: *design,
        curve_kind: CurveKind::Reflectance,
        sweep: wavelengths.to_vec(),
        values,
    })
}

/// Evenly spaced depths from 0 to the wafer thickness (last point exact).
pub fn depth_grid(wafer_thickness_um: f64, n: usize) -> Vec<f64> {
    let mut z: Vec<f64> = (0..n)
        .map(|i| wafer_thickness_um * i as f64 / (n - 1) as f64)
        .collect();
    z[n - 1] = wafer_thickness_um;
    z
}

/// Generation rate at arbitrary depths (µm) inside the wafer.
pub fn generation_at(
    design: &CellDesign,
    depths_um: &[f64],
    wavelengths: &[f64],
    c: &OpticalConstants,
) -> Result<Vec<f64>> {
    design.validate()?;
    let f = path_factor(design.pyramid_angle_deg);
    let w = design.wafer_thickness_um * UM_TO_CM;
    let rb = design.back_reflectivity_frac;
    // per-wavelength (weight, effective absorption)
    let terms = wavelengths
        .iter()
        .map(|&wl| {
            let alpha = c.absorption(wl, design.substrate_doping_cm3)?;
            let entering = 1.0 - front_reflectance(design, wl, c);
            Ok((c.photon_flux(wl) * entering * alpha * f, alpha * f))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(depths_um
        .iter()
        .map(|&z_um| {
            let z = z_um * UM_TO_CM;
            terms
                .iter()
                .map(|(weight, a)| weight * ((-a * z).exp() + rb * (-a * (2.0 * w - z)).exp()))
                .sum::<f64>()
        })
        .collect())
}

pub fn simulate_generation(
    design: &CellDesign,
    n_depth_points: usize,
    wavelengths: &[f64],
    c: &OpticalConstants,
) -> Result<SimulationRun> {
    design.validate()?;
    if n_depth_points < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 depth points, got {n_depth_points}"
        )));
    }
    let sweep = depth_grid(design.wafer_thickness_um, n_depth_points);
    let values = generation_at(design, &sweep, wavelengths, c)?;
    Ok(SimulationRun {
        design: *design,
        curve_kind: CurveKind::Generation,
        sweep,
        values,
    })
}

/// Value lists for a full-factorial database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub wafer_thickness_um: Vec<f64>,
    pub substrate_doping_cm3: Vec<f64>,
    pub pyramid_angle_deg: Vec<f64>,
    pub rear_contact_thickness_um: Vec<f64>,
    pub arc_thickness_nm: Vec<f64>,
    pub back_reflectivity_frac: Vec<f64>,
    pub wavelengths_nm: Vec<f64>,
    pub depth_points: usize,
}

impl Default for GridSpec {
    /// 4 × 2 × 4 × 2 × 4 × 3 = 768 designs; 18 wavelengths; 224 depth points.
    fn default() -> Self {
        GridSpec {
            wafer_thickness_um: vec![100.0, 150.0, 200.0, 250.0],
            substrate_doping_cm3: vec![1e16, 5e18],
            pyramid_angle_deg: vec![30.0, 40.0, 50.0, FACET_ANGLE_DEG],
            rear_contact_thickness_um: vec![2.0, 20.0],
            arc_thickness_nm: vec![60.0, 75.0, 90.0, 105.0],
            back_reflectivity_frac: vec![0.6, 0.8, 0.95],
            wavelengths_nm: default_wavelengths(),
            depth_points: 224,
        }
    }
}

impl GridSpec {
    fn lists(&self) -> [(&'static str, &Vec<f64>); 6] {
        [
            (DESIGN_FEATURES[0], &self.wafer_thickness_um),
            (DESIGN_FEATURES[1], &self.substrate_doping_cm3),
            (DESIGN_FEATURES[2], &self.pyramid_angle_deg),
            (DESIGN_FEATURES[3], &self.rear_contact_thickness_um),
            (DESIGN_FEATURES[4], &self.arc_thickness_nm),
            (DESIGN_FEATURES[5], &self.back_reflectivity_frac),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, list) in self.lists() {
            if list.is_empty() {
                return Err(Error::InvalidArgument(format!("grid field `{name}` is empty")));
            }
        }
        if self.wavelengths_nm.is_empty() {
            return Err(Error::InvalidArgument(
                "grid field `wavelengths_nm` is empty".into(),
            ));
        }
        if self.wavelengths_nm.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "grid field `wavelengths_nm` must strictly increase".into(),
            ));
        }
        if self.depth_points < 2 {
            return Err(Error::InvalidArgument(
                "grid field `depth_points` must be >= 2".into(),
            ));
        }
        Ok(())
    }

    pub fn n_runs(&self) -> usize {
        self.lists().iter().map(|(_, l)| l.len()).product()
    }

    pub fn sweep_len(&self, kind: CurveKind) -> usize {
        match kind {
            CurveKind::Reflectance => self.wavelengths_nm.len(),
            CurveKind::Generation => self.depth_points,
        }
    }

    /// Full Cartesian product, first field varying slowest.
    pub fn designs(&self) -> Vec<CellDesign> {
        let lists = self.lists();
        let mut out = vec![[0.0; 6]];
        for (k, (_, list)) in lists.iter().enumerate() {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    list.iter().map(move |&v| {
                        let mut p = prefix;
                        p[k] = v;
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(CellDesign::from_array).collect()
    }
}

/// Simulates every design of the grid, then adds seeded Gaussian noise.
///
/// Noise for run `i` comes from its own ChaCha stream, so the output does
/// not depend on how runs are scheduled across threads.
pub fn generate_database(
    grid: &GridSpec,
    kind: CurveKind,
    constants: &OpticalConstants,
    noise_sd: f64,
    seed: u64,
) -> Result<Vec<SimulationRun>> {
    grid.validate()?;
    constants.validate()?;
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise_sd must be >= 0, got {noise_sd}"
        )));
    }
    let rows = grid.n_runs().saturating_mul(grid.sweep_len(kind));
    if rows > MAX_ROWS {
        return Err(Error::SizeGuard {
            rows,
            limit: MAX_ROWS,
        });
    }
    let designs = grid.designs();
    for d in &designs {
        d.validate()?;
    }
    let noise = Normal::new(0.0, noise_sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    designs
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let mut run = match kind {
                CurveKind::Reflectance => simulate_reflectance(d, &grid.wavelengths_nm, constants)?,
                CurveKind::Generation => {
                    simulate_generation(d, grid.depth_points, &grid.wavelengths_nm, constants)?
                }
            };
            if noise_sd > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                for v in run.values.iter_mut() {
                    *v += noise.sample(&mut rng);
                    *v = match kind {
                        CurveKind::Reflectance => v.clamp(0.0, 1.0),
                        CurveKind::Generation => v.max(0.0),
                    };
                }
            }
            Ok(run)
        })
        .collect()
}

/// Hash identifying everything that determines a generated database.
pub fn config_hash(
    grid: &GridSpec,
    kind: CurveKind,
    constants: &OpticalConstants,
    noise_sd: f64,
    seed: u64,
) -> String {
    let payload = serde_json::json!({
        "oracle_version": ORACLE_VERSION,
        "grid": grid,
        "kind": kind,
        "constants": constants,
        "noise_sd": noise_sd,
        "seed": seed,
    });
    hex::encode(Sha256::digest(payload.to_string().as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> CellDesign {
        CellDesign {
            wafer_thickness_um: 180.0,
            substrate_doping_cm3: 1e16,
            pyramid_angle_deg: 50.0,
            rear_contact_thickness_um: 2.0,
            arc_thickness_nm: 75.0,
            back_reflectivity_frac: 0.9,
        }
    }

    /// Airy summation for a single film, independent of the matrix route.
    fn airy(n1: f64, n2: f64, d: f64, wl: f64) -> f64 {
        let r01 = (1.0 - n1) / (1.0 + n1);
        let r12 = (n1 - n2) / (n1 + n2);
        let c = (4.0 * PI * n1 * d / wl).cos();
        (r01 * r01 + r12 * r12 + 2.0 * r01 * r12 * c) / (1.0 + r01 * r01 * r12 * r12 + 2.0 * r01 * r12 * c)
    }

    #[test]
    fn matrix_route_matches_airy_formula() {
        for d in [0.0, 40.0, 75.0, 133.0] {
            for wl in default_wavelengths() {
                let m = thin_film_reflectance(2.0, 3.8, d, wl);
                assert!((m - airy(2.0, 3.8, d, wl)).abs() < 1e-14);
            }
        }
        // bare silicon
        let bare = ((1.0 - 3.8) / (1.0 + 3.8f64)).powi(2);
        assert!((thin_film_reflectance(2.0, 3.8, 0.0, 500.0) - bare).abs() < 1e-14);
    }

    #[test]
    fn quarter_wave_minimum_at_600nm() {
        let c = OpticalConstants::default();
        let mut d = base();
        d.pyramid_angle_deg = 1e-6;
        d.arc_thickness_nm = 75.0;
        let wl = default_wavelengths();
        let front: Vec<f64> = wl.iter().map(|&l| front_reflectance(&d, l, &c)).collect();
        let imin = front
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(wl[imin], 4.0 * 2.0 * 75.0);
        assert!(imin > 0 && imin < wl.len() - 1);
    }

    #[test]
    fn no_back_reflection_leaves_front_term_only() {
        let c = OpticalConstants::default();
        let mut d = base();
        d.back_reflectivity_frac = 0.0;
        let r = reflectance_at(&d, 1150.0, &c).unwrap();
        assert_eq!(r, front_reflectance(&d, 1150.0, &c));
        assert_eq!(escape_reflectance(&d, 1150.0, &c).unwrap(), 0.0);
    }

    #[test]
    fn rear_contact_has_no_effect() {
        let c = OpticalConstants::default();
        let a = base();
        let mut b = base();
        b.rear_contact_thickness_um = 25.0;
        let wl = default_wavelengths();
        assert_eq!(
            simulate_reflectance(&a, &wl, &c).unwrap().values,
            simulate_reflectance(&b, &wl, &c).unwrap().values
        );
        assert_eq!(
            simulate_generation(&a, 50, &wl, &c).unwrap().values,
            simulate_generation(&b, 50, &wl, &c).unwrap().values
        );
    }

    #[test]
    fn wavelength_outside_table_rejected() {
        let c = OpticalConstants::default();
        assert!(simulate_reflectance(&base(), &[250.0], &c).is_err());
        assert!(simulate_reflectance(&base(), &[1200.0], &c).is_err());
    }

    #[test]
    fn absorption_interpolation() {
        let c = OpticalConstants::default();
        assert_eq!(c.band_absorption(300.0).unwrap(), 1.84e6);
        assert!((c.band_absorption(1150.0).unwrap() - 0.32).abs() < 1e-12);
        let mid = c.band_absorption(1025.0).unwrap();
        assert!((mid - (64.0f64 * 16.3).sqrt()).abs() < 1e-9);
        let grid = default_wavelengths();
        for w in grid.windows(2) {
            assert!(c.band_absorption(w[1]).unwrap() < c.band_absorption(w[0]).unwrap());
        }
        assert!(c.absorption(1100.0, 1e19).unwrap() > c.absorption(1100.0, 1e15).unwrap());
    }

    #[test]
    fn generation_profile_shape() {
        let c = OpticalConstants::default();
        let wl = default_wavelengths();
        let mut d = base();
        d.back_reflectivity_frac = 0.0;
        let g = simulate_generation(&d, 40, &wl, &c).unwrap();
        assert_eq!(*g.sweep.last().unwrap(), d.wafer_thickness_um);
        assert!(g.values.windows(2).all(|w| w[1] < w[0]));
        assert!(g.validate().is_ok());
    }

    #[test]
    fn surface_generation_insensitive_to_thickness() {
        let c = OpticalConstants::default();
        let wl = default_wavelengths();
        let a = base();
        let mut b = base();
        b.wafer_thickness_um *= 2.0;
        let ga = simulate_generation(&a, 10, &wl, &c).unwrap().values[0];
        let gb = simulate_generation(&b, 10, &wl, &c).unwrap().values[0];
        assert!(((ga - gb) / ga).abs() < 0.01, "{ga} vs {gb}");
    }

    #[test]
    fn back_reflectivity_is_monotone() {
        let c = OpticalConstants::default();
        let wl = default_wavelengths();
        let mut prev_g: Option<Vec<f64>> = None;
        let mut prev_r: Option<f64> = None;
        for rb in [0.0, 0.3, 0.6, 0.9, 1.0] {
            let mut d = base();
            d.back_reflectivity_frac = rb;
            let g = simulate_generation(&d, 30, &wl, &c).unwrap().values;
            let r = escape_reflectance(&d, 1100.0, &c).unwrap();
            if let (Some(pg), Some(pr)) = (&prev_g, prev_r) {
                assert!(g.iter().zip(pg).all(|(a, b)| a >= b));
                assert!(r >= pr);
            }
            prev_g = Some(g);
            prev_r = Some(r);
        }
    }

    #[test]
    fn default_grid_has_768_runs() {
        let g = GridSpec::default();
        assert_eq!(g.n_runs(), 768);
        assert_eq!(g.designs().len(), 768);
        assert_eq!(g.n_runs() * g.sweep_len(CurveKind::Reflectance), 13824);
        assert_eq!(g.wavelengths_nm.first(), Some(&300.0));
        assert_eq!(g.wavelengths_nm.last(), Some(&1150.0));
    }

    #[test]
    fn empty_grid_field_named() {
        let g = GridSpec {
            arc_thickness_nm: vec![],
            ..GridSpec::default()
        };
        let err = generate_database(&g, CurveKind::Reflectance, &OpticalConstants::default(), 0.0, 1)
            .unwrap_err();
        assert!(err.to_string().contains("arc_thickness_nm"));
    }

    #[test]
    fn size_guard() {
        let g = GridSpec {
            depth_points: 5000,
            ..GridSpec::default()
        };
        let err = generate_database(&g, CurveKind::Generation, &OpticalConstants::default(), 0.0, 1)
            .unwrap_err();
        assert!(matches!(err, Error::SizeGuard { .. }));
    }

    #[test]
    fn database_is_deterministic_and_bounded() {
        let g = GridSpec {
            wafer_thickness_um: vec![120.0, 180.0],
            substrate_doping_cm3: vec![1e16],
            pyramid_angle_deg: vec![40.0, 54.74],
            rear_contact_thickness_um: vec![2.0, 20.0],
            ..GridSpec::default()
        };
        let c = OpticalConstants::default();
        let a = generate_database(&g, CurveKind::Reflectance, &c, 0.01, 9).unwrap();
        let b = generate_database(&g, CurveKind::Reflectance, &c, 0.01, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().flat_map(|r| &r.values).all(|v| (0.0..=1.0).contains(v)));
        let clean = generate_database(&g, CurveKind::Reflectance, &c, 0.0, 9).unwrap();
        assert_eq!(clean, generate_database(&g, CurveKind::Reflectance, &c, 0.0, 123).unwrap());
        assert_ne!(a, clean);
        // designs differing only in rear contact give identical clean curves
        let by_rear = |r: &SimulationRun| {
            let mut d = r.design;
            d.rear_contact_thickness_um = 0.0;
            d.to_array().map(f64::to_bits)
        };
        for r in &clean {
            let twin = clean
                .iter()
                .find(|o| by_rear(o) == by_rear(r) && o.design != r.design)
                .unwrap();
            assert_eq!(twin.values, r.values);
        }
    }

    #[test]
    fn config_hash_changes_with_seed() {
        let g = GridSpec::default();
        let c = OpticalConstants::default();
        let a = config_hash(&g, CurveKind::Reflectance, &c, 0.0, 1);
        assert_eq!(a, config_hash(&g, CurveKind::Reflectance, &c, 0.0, 1));
        assert_ne!(a, config_hash(&g, CurveKind::Reflectance, &c, 0.0, 2));
    }
}
