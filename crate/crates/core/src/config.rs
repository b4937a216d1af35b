//! Flat `key = value` run configuration.
//!
//! Lines are `section.key = value`; `#` starts a comment. Every key has a
//! default, and unknown keys are rejected so that typos fail loudly.

use crate::design::{
    DEFAULT_GRATING_POINTS, DEFAULT_GRATING_RANGE, DEFAULT_SIGNAL_POINTS, DEFAULT_SIGNAL_RANGE_NM, DEFAULT_SPREAD_LIMIT,
    DEFAULT_TOLERANCE_STEPS_NM,
};
use crate::error::{Error, Result};
use crate::format::sig17;
use crate::material::{lithium_niobate, MaterialModel, Sellmeier};
use crate::modesolver::CouplerGeometry;
use crate::spdc::DEFAULT_DIMENSION_THRESHOLD;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Every key understood by [`RunConfig`], in echo order.
pub const KEYS: &[&str] = &[
    "material.sellmeier_set",
    "material.sellmeier_o",
    "material.sellmeier_e",
    "material.delta_n_h",
    "material.delta_n_v",
    "material.d24",
    "geometry.width_a_um",
    "geometry.gap_d_um",
    "geometry.depth_b_um",
    "geometry.length_L_mm",
    "geometry.cover_index",
    "geometry.grating_period_um",
    "pump.wavelength_nm",
    "pump.pump_mode",
    "sweep.signal_min_nm",
    "sweep.signal_max_nm",
    "sweep.signal_points",
    "sweep.grating_min",
    "sweep.grating_max",
    "sweep.grating_points",
    "sweep.tolerance_nm",
    "sweep.spread_limit",
    "state.filter_center_nm",
    "state.filter_width_nm",
    "state.dimension_threshold",
    "calibration.target_k",
    "calibration.spread_weight",
    "spdc.scale",
    "output.dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PumpConfig {
    pub wavelength_nm: f64,
    pub pump_mode: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub signal_range_nm: (f64, f64),
    pub signal_points: usize,
    pub grating_range: (f64, f64),
    pub grating_points: usize,
    pub tolerance_nm: Vec<f64>,
    pub spread_limit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateConfig {
    /// Defaults to degeneracy when absent.
    pub filter_center_nm: Option<f64>,
    pub filter_width_nm: f64,
    pub dimension_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationConfig {
    pub target_k: f64,
    pub spread_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Name of the embedded dispersion set, or `custom` once coefficients are given explicitly.
    pub sellmeier_set: String,
    pub material: MaterialModel,
    pub geometry: CouplerGeometry,
    pub pump: PumpConfig,
    pub sweep: SweepConfig,
    pub state: StateConfig,
    pub calibration: CalibrationConfig,
    pub scale: f64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sellmeier_set: "mgo".into(),
            material: MaterialModel::default(),
            geometry: CouplerGeometry::default(),
            pump: PumpConfig { wavelength_nm: 675.0, pump_mode: 0 },
            sweep: SweepConfig {
                signal_range_nm: DEFAULT_SIGNAL_RANGE_NM,
                signal_points: DEFAULT_SIGNAL_POINTS,
                grating_range: DEFAULT_GRATING_RANGE,
                grating_points: DEFAULT_GRATING_POINTS,
                tolerance_nm: DEFAULT_TOLERANCE_STEPS_NM.to_vec(),
                spread_limit: DEFAULT_SPREAD_LIMIT,
            },
            state: StateConfig { filter_center_nm: None, filter_width_nm: 0.0, dimension_threshold: DEFAULT_DIMENSION_THRESHOLD },
            calibration: CalibrationConfig { target_k: 0.9074, spread_weight: 1.0 },
            scale: 1.0,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn num(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.trim().parse().map_err(|_| Error::Config(format!("{key}: `{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("{key}: `{v}` is not finite")));
    }
    Ok(x)
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.trim().parse().map_err(|_| Error::Config(format!("{key}: `{v}` is not a non-negative integer")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| num(key, x)).collect()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| sig17(*x)).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.apply_line(line).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", n + 1)),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies one `key=value` override (the `--set` flag).
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        self.apply_line(kv)?;
        self.validate()
    }

    fn apply_line(&mut self, line: &str) -> Result<()> {
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("expected key = value, got `{line}`")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "material.sellmeier_set" => {
                let (o, e) = match v {
                    "custom" => return Ok(()),
                    "mgo" => (lithium_niobate::MGO_ORDINARY, lithium_niobate::MGO_EXTRAORDINARY),
                    "congruent" => (lithium_niobate::CONGRUENT_ORDINARY, lithium_niobate::CONGRUENT_EXTRAORDINARY),
                    _ => return Err(Error::Config(format!("{key}: expected `mgo`, `congruent` or `custom`, got `{v}`"))),
                };
                self.material.sellmeier_ordinary = Sellmeier::new(o.to_vec())?;
                self.material.sellmeier_extraordinary = Sellmeier::new(e.to_vec())?;
                self.sellmeier_set = v.to_string();
            }
            "material.sellmeier_o" => {
                let law = Sellmeier::from_flat(&list(key, v)?)?;
                if law != self.material.sellmeier_ordinary {
                    self.material.sellmeier_ordinary = law;
                    self.sellmeier_set = "custom".into();
                }
            }
            "material.sellmeier_e" => {
                let law = Sellmeier::from_flat(&list(key, v)?)?;
                if law != self.material.sellmeier_extraordinary {
                    self.material.sellmeier_extraordinary = law;
                    self.sellmeier_set = "custom".into();
                }
            }
            "material.delta_n_h" => self.material.delta_n_h = num(key, v)?,
            "material.delta_n_v" => self.material.delta_n_v = num(key, v)?,
            "material.d24" => self.material.d24 = num(key, v)?,
            "geometry.width_a_um" => self.geometry.width_a = num(key, v)?,
            "geometry.gap_d_um" => self.geometry.gap_d = num(key, v)?,
            "geometry.depth_b_um" => self.geometry.depth_b = num(key, v)?,
            "geometry.length_L_mm" => self.geometry.length_mm = num(key, v)?,
            "geometry.cover_index" => self.geometry.cover_index = num(key, v)?,
            "geometry.grating_period_um" => {
                self.geometry.grating_period = if v.is_empty() || v == "auto" { None } else { Some(num(key, v)?) }
            }
            "pump.wavelength_nm" => self.pump.wavelength_nm = num(key, v)?,
            "pump.pump_mode" => self.pump.pump_mode = count(key, v)?,
            "sweep.signal_min_nm" => self.sweep.signal_range_nm.0 = num(key, v)?,
            "sweep.signal_max_nm" => self.sweep.signal_range_nm.1 = num(key, v)?,
            "sweep.signal_points" => self.sweep.signal_points = count(key, v)?,
            "sweep.grating_min" => self.sweep.grating_range.0 = num(key, v)?,
            "sweep.grating_max" => self.sweep.grating_range.1 = num(key, v)?,
            "sweep.grating_points" => self.sweep.grating_points = count(key, v)?,
            "sweep.tolerance_nm" => self.sweep.tolerance_nm = list(key, v)?,
            "sweep.spread_limit" => self.sweep.spread_limit = num(key, v)?,
            "state.filter_center_nm" => {
                self.state.filter_center_nm = if v.is_empty() || v == "auto" { None } else { Some(num(key, v)?) }
            }
            "state.filter_width_nm" => self.state.filter_width_nm = num(key, v)?,
            "state.dimension_threshold" => self.state.dimension_threshold = num(key, v)?,
            "calibration.target_k" => self.calibration.target_k = num(key, v)?,
            "calibration.spread_weight" => self.calibration.spread_weight = num(key, v)?,
            "spdc.scale" => self.scale = num(key, v)?,
            "output.dir" => self.output_dir = PathBuf::from(v),
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.material.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.geometry.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.pump.pump_mode > 1 {
            return bad(format!("pump.pump_mode must be 0 or 1, got {}", self.pump.pump_mode));
        }
        if !(self.pump.wavelength_nm > 0.0) {
            return bad("pump.wavelength_nm must be positive".into());
        }
        let (a, b) = self.sweep.signal_range_nm;
        if !(a < b) || self.sweep.signal_points < 2 {
            return bad(format!("signal sweep needs min < max and >= 2 points, got ({a}, {b}) x {}", self.sweep.signal_points));
        }
        if !(a > self.pump.wavelength_nm) {
            return bad("sweep.signal_min_nm must exceed the pump wavelength".into());
        }
        let (a, b) = self.sweep.grating_range;
        if !(a < b) || self.sweep.grating_points < 2 {
            return bad(format!("grating sweep needs min < max and >= 2 points, got ({a}, {b}) x {}", self.sweep.grating_points));
        }
        if !(self.state.filter_width_nm >= 0.0) {
            return bad("state.filter_width_nm must be non-negative".into());
        }
        if !(self.scale != 0.0) {
            return bad("spdc.scale must be nonzero".into());
        }
        Ok(())
    }

    pub fn pump_um(&self) -> f64 {
        self.pump.wavelength_nm * 1e-3
    }

    pub fn degenerate_signal_nm(&self) -> f64 {
        2.0 * self.pump.wavelength_nm
    }

    /// Effective configuration, one `key = value` per known key.
    pub fn to_kv(&self) -> String {
        let m = &self.material;
        let g = &self.geometry;
        let s = &self.sweep;
        let opt = |v: Option<f64>| v.map(sig17).unwrap_or_else(|| "auto".into());
        let values = [
            self.sellmeier_set.clone(),
            join(&m.sellmeier_ordinary.to_flat()),
            join(&m.sellmeier_extraordinary.to_flat()),
            sig17(m.delta_n_h),
            sig17(m.delta_n_v),
            sig17(m.d24),
            sig17(g.width_a),
            sig17(g.gap_d),
            sig17(g.depth_b),
            sig17(g.length_mm),
            sig17(g.cover_index),
            opt(g.grating_period),
            sig17(self.pump.wavelength_nm),
            self.pump.pump_mode.to_string(),
            sig17(s.signal_range_nm.0),
            sig17(s.signal_range_nm.1),
            s.signal_points.to_string(),
            sig17(s.grating_range.0),
            sig17(s.grating_range.1),
            s.grating_points.to_string(),
            join(&s.tolerance_nm),
            sig17(s.spread_limit),
            opt(self.state.filter_center_nm),
            sig17(self.state.filter_width_nm),
            sig17(self.state.dimension_threshold),
            sig17(self.calibration.target_k),
            sig17(self.calibration.spread_weight),
            sig17(self.scale),
            self.output_dir.display().to_string(),
        ];
        let mut out = String::new();
        for (k, v) in KEYS.iter().zip(values) {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
