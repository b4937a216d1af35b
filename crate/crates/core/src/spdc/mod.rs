//! Type-II down-conversion in the coupler: process enumeration, grating
//! frequencies, phase mismatch, overlaps and the resulting biphoton state.
//!
//! The pump and signal are H-polarized and the idler V-polarized throughout.

mod state;

pub use state::{
    entanglement_metrics, inverse_port_mapping, port_mapping, state_csv, Basis, BiphotonState, Metrics, Port, StateTerm,
    DEFAULT_DIMENSION_THRESHOLD,
};

use crate::error::{Error, Result};
use crate::material::{MaterialModel, Polarization};
use crate::modesolver::{solve_channel_modes, ChannelMode, CouplerGeometry, PUMP_MODES, SIGNAL_IDLER_MODES};
use crate::quad::{integrate_segments, QuadOptions};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;

/// Case A is pumped in supermode 0, case B in supermode 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    A,
    B,
}

impl Case {
    pub fn from_pump_mode(pump_mode: usize) -> Result<Self> {
        match pump_mode {
            0 => Ok(Case::A),
            1 => Ok(Case::B),
            m => Err(Error::UnsupportedPump(m)),
        }
    }

    pub fn pump_mode(self) -> usize {
        match self {
            Case::A => 0,
            Case::B => 1,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::A => "A",
            Case::B => "B",
        })
    }
}

/// Whether a process belongs to the engineered state or is only monitored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Term `j` (1-based) of the output state.
    State(usize),
    /// Parity-allowed but left out of the state; `k` is 1-based.
    Contamination(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProcessSpec {
    pub case: Case,
    pub pump_mode: usize,
    pub signal_mode: usize,
    pub idler_mode: usize,
    pub role: Role,
}

impl ProcessSpec {
    pub const PUMP_POL: Polarization = Polarization::H;
    pub const SIGNAL_POL: Polarization = Polarization::H;
    pub const IDLER_POL: Polarization = Polarization::V;

    pub fn in_state(&self) -> bool {
        matches!(self.role, Role::State(_))
    }

    /// Short label such as `A1`, `B4` or `A-x1`.
    pub fn label(&self) -> String {
        match self.role {
            Role::State(j) => format!("{}{}", self.case, j),
            Role::Contamination(k) => format!("{}-x{}", self.case, k),
        }
    }

    pub fn parity_allowed(&self) -> bool {
        parity_allowed(self.pump_mode, self.signal_mode, self.idler_mode)
    }
}

impl fmt::Display for ProcessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (p{} -> H_s{} V_i{})", self.label(), self.pump_mode, self.signal_mode, self.idler_mode)
    }
}

/// Mode `m` is even in y for even `m`; the triple overlap survives only if the
/// product of the three parities is even.
pub fn parity_allowed(pump_mode: usize, signal_mode: usize, idler_mode: usize) -> bool {
    (pump_mode + signal_mode + idler_mode) % 2 == 0
}

/// Parity-allowed processes among signal/idler supermodes 0..2.
///
/// Pump 0 gives the state triple `(0,0), (1,1), (2,2)` followed by the
/// contaminating `(0,2), (2,0)`; pump 1 gives `(0,1), (1,0), (1,2), (2,1)`.
pub fn enumerate_processes(pump_mode: usize) -> Result<Vec<ProcessSpec>> {
    let case = Case::from_pump_mode(pump_mode)?;
    let mk = |s, i, role| ProcessSpec { case, pump_mode, signal_mode: s, idler_mode: i, role };
    Ok(match case {
        Case::A => vec![
            mk(0, 0, Role::State(1)),
            mk(1, 1, Role::State(2)),
            mk(2, 2, Role::State(3)),
            mk(0, 2, Role::Contamination(1)),
            mk(2, 0, Role::Contamination(2)),
        ],
        Case::B => vec![
            mk(0, 1, Role::State(1)),
            mk(1, 0, Role::State(2)),
            mk(1, 2, Role::State(3)),
            mk(2, 1, Role::State(4)),
        ],
    })
}

/// Idler wavelength from `1/l_i = 1/l_p - 1/l_s`.
pub fn idler_wavelength(pump_um: f64, signal_um: f64) -> Result<f64> {
    let inv = 1.0 / pump_um - 1.0 / signal_um;
    if !(inv > 0.0 && inv.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "signal {signal_um} um is not longer than pump {pump_um} um; no idler"
        )));
    }
    Ok(1.0 / inv)
}

/// Modes of pump, signal and idler at one wavelength triple.
#[derive(Debug, Clone)]
pub struct ModeTable {
    pub pump_um: f64,
    pub signal_um: f64,
    pub idler_um: f64,
    pub pump: Vec<ChannelMode>,
    pub signal: Vec<ChannelMode>,
    pub idler: Vec<ChannelMode>,
}

impl ModeTable {
    pub fn solve(material: &MaterialModel, geometry: &CouplerGeometry, pump_um: f64, signal_um: f64) -> Result<Self> {
        let idler_um = idler_wavelength(pump_um, signal_um)?;
        Ok(Self {
            pump_um,
            signal_um,
            idler_um,
            pump: solve_channel_modes(material, geometry, pump_um, ProcessSpec::PUMP_POL, PUMP_MODES)?,
            signal: solve_channel_modes(material, geometry, signal_um, ProcessSpec::SIGNAL_POL, SIGNAL_IDLER_MODES)?,
            idler: solve_channel_modes(material, geometry, idler_um, ProcessSpec::IDLER_POL, SIGNAL_IDLER_MODES)?,
        })
    }

    /// `(pump, signal, idler)` modes of `spec`.
    pub fn triple(&self, spec: &ProcessSpec) -> Result<(&ChannelMode, &ChannelMode, &ChannelMode)> {
        Ok((
            pick(&self.pump, spec.pump_mode, ProcessSpec::PUMP_POL, self.pump_um)?,
            pick(&self.signal, spec.signal_mode, ProcessSpec::SIGNAL_POL, self.signal_um)?,
            pick(&self.idler, spec.idler_mode, ProcessSpec::IDLER_POL, self.idler_um)?,
        ))
    }
}

fn pick(modes: &[ChannelMode], m: usize, pol: Polarization, wavelength_um: f64) -> Result<&ChannelMode> {
    modes.get(m).ok_or(Error::ModeCount { pol, wavelength_um, found: modes.len(), expected: m + 1 })
}

/// `K = 2 pi (n_p/l_p - n_s/l_s - n_i/l_i)`, um^-1, with the idler fixed by energy conservation.
pub fn qpm_frequency_from_indices(n_p: f64, n_s: f64, n_i: f64, pump_um: f64, signal_um: f64) -> Result<f64> {
    let idler_um = idler_wavelength(pump_um, signal_um)?;
    Ok(2.0 * PI * (n_p / pump_um - n_s / signal_um - n_i / idler_um))
}

/// Grating frequency that phase-matches `spec` exactly, `beta_p - beta_s - beta_i`.
pub fn qpm_frequency(spec: &ProcessSpec, modes: &ModeTable) -> Result<f64> {
    let (p, s, i) = modes.triple(spec)?;
    Ok(p.beta - s.beta - i.beta)
}

/// `Δk = beta_p - beta_s - beta_i - K`, rad/um.
pub fn phase_mismatch(spec: &ProcessSpec, modes: &ModeTable, grating_k: f64) -> Result<f64> {
    Ok(qpm_frequency(spec, modes)? - grating_k)
}

/// `∬ u_p u_s u_i dy dz` of the unit-power fields, um^-1.
pub fn overlap_integral(spec: &ProcessSpec, modes: &ModeTable) -> Result<f64> {
    let (p, s, i) = modes.triple(spec)?;
    triple_overlap(p, s, i)
}

/// Overlap of three separable fields, factorised into width and depth integrals.
pub fn triple_overlap(p: &ChannelMode, s: &ChannelMode, i: &ChannelMode) -> Result<f64> {
    let opts = QuadOptions::default();
    let widest = |a: Vec<f64>, b: Vec<f64>| -> Vec<f64> {
        a.iter().zip(&b).map(|(x, y)| if x.abs() > y.abs() { *x } else { *y }).collect()
    };
    let yb = widest(widest(p.y_mode.breakpoints(), s.y_mode.breakpoints()), i.y_mode.breakpoints());
    let zb = widest(widest(p.z_mode.breakpoints(), s.z_mode.breakpoints()), i.z_mode.breakpoints());
    let iy = integrate_segments(&|y| p.y(y) * s.y(y) * i.y(y), &yb, &opts)?;
    let iz = integrate_segments(&|z| p.z(z) * s.z(z) * i.z(z), &zb, &opts)?;
    Ok(iy * iz)
}

/// Unnormalised `sin(x)/x`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// One evaluated down-conversion channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessResult {
    pub spec: ProcessSpec,
    /// um^-1
    pub k_required: f64,
    /// rad/um
    pub delta_k: f64,
    /// um^-1
    pub overlap: f64,
    /// Product of signal and idler effective indices.
    pub n_product: f64,
    /// `F = I sinc(Δk L/2) / N exp(-i Δk L/2)`, independent of the common scale.
    pub f_value: Complex64,
    /// `scale * F`.
    pub coefficient: Complex64,
    /// `|F|^2` relative to the largest among the processes it was evaluated with.
    pub efficiency: f64,
}

impl ProcessResult {
    pub fn raw_efficiency(&self) -> f64 {
        self.f_value.norm_sqr()
    }
}

/// Evaluates `spec` against a grating of frequency `grating_k` (um^-1) over length `length_mm`.
pub fn coefficient(
    spec: &ProcessSpec,
    modes: &ModeTable,
    grating_k: f64,
    length_mm: f64,
    scale: f64,
) -> Result<ProcessResult> {
    if !(length_mm > 0.0) {
        return Err(Error::InvalidInput(format!("interaction length must be positive, got {length_mm} mm")));
    }
    let (_, s, i) = modes.triple(spec)?;
    let k_required = qpm_frequency(spec, modes)?;
    let delta_k = k_required - grating_k;
    let overlap = overlap_integral(spec, modes)?;
    let n_product = s.n_eff * i.n_eff;
    let half = 0.5 * delta_k * length_mm * 1e3;
    let f_value = Complex64::from_polar(overlap * sinc(half) / n_product, -half);
    Ok(ProcessResult {
        spec: *spec,
        k_required,
        delta_k,
        overlap,
        n_product,
        f_value,
        coefficient: f_value * scale,
        efficiency: f_value.norm_sqr(),
    })
}

/// Rescales `efficiency` so the strongest process reads 1.
pub fn normalize_efficiencies(results: &mut [ProcessResult]) {
    let max = results.iter().map(ProcessResult::raw_efficiency).fold(0.0, f64::max);
    for r in results.iter_mut() {
        r.efficiency = if max > 0.0 { r.raw_efficiency() / max } else { 0.0 };
    }
}

/// All processes of `pump_mode`, with efficiencies normalised over the full list.
pub fn evaluate_processes(
    pump_mode: usize,
    modes: &ModeTable,
    grating_k: f64,
    length_mm: f64,
    scale: f64,
) -> Result<Vec<ProcessResult>> {
    let mut out = enumerate_processes(pump_mode)?
        .iter()
        .map(|s| coefficient(s, modes, grating_k, length_mm, scale))
        .collect::<Result<Vec<_>>>()?;
    normalize_efficiencies(&mut out);
    Ok(out)
}

/// Normalised output state built from the state terms of `pump_mode`.
pub fn assemble_state(pump_mode: usize, modes: &ModeTable, grating_k: f64, length_mm: f64) -> Result<BiphotonState> {
    let results = evaluate_processes(pump_mode, modes, grating_k, length_mm, 1.0)?;
    BiphotonState::from_results(&results)
}
