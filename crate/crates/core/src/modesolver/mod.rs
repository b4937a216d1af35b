//! Guided normal modes of the three-guide coupler.
//!
//! The channel index profile is replaced by the separable form
//! `n^2(y, z) = n^2(y) + n^2(z) - n_core^2`: a seven-layer coupler slab across
//! the width (y) and a three-layer cover/core/substrate slab along the depth
//! (z). Each slab is solved from its closed-form eigenvalue equations, checked
//! against a transfer-matrix oracle, and the two are recombined with a
//! first-order correction for the corner regions the separable profile gets
//! wrong.

mod channel;
mod coupler_y;
mod roots;
mod slab_z;
pub mod transfer;

pub use channel::{compose_channel_mode, composed_beta, perturbation_correction, solve_channel_modes, ChannelMode};
pub use coupler_y::{closed_form_roots, coupler_residual, solve_coupler_y, solve_coupler_y_with, Parity, SlabModeY, YCoefficients};
pub use slab_z::{slab_z_residual, solve_slab_z, SlabModeZ, ZCoefficients};
pub use transfer::{transfer_matrix_oracle, Layer, LayerStack, Wave};

use crate::error::{Error, Result};
use crate::material::Polarization;
use std::fmt::Write as _;

/// Samples used to isolate roots of the closed-form dispersion functions.
pub const SCAN_POINTS: usize = 2000;
/// Closed-form roots further than this (in n_eff) from the oracle are replaced.
pub const ORACLE_ARBITRATION_TOL: f64 = 1e-6;
/// Tails are integrated out to this many decay lengths (`exp(-2*40)` of peak power).
pub(crate) const TAIL_DECAY_LENGTHS: f64 = 40.0;

/// Three identical guides of width `a`, edge-to-edge gap `d` and depth `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplerGeometry {
    /// um
    pub width_a: f64,
    /// um
    pub gap_d: f64,
    /// um
    pub depth_b: f64,
    /// Interaction length, mm.
    pub length_mm: f64,
    /// Poling period, um.
    pub grating_period: Option<f64>,
    /// Index above the surface (air by default).
    pub cover_index: f64,
}

impl Default for CouplerGeometry {
    fn default() -> Self {
        Self { width_a: 6.0, gap_d: 6.0, depth_b: 7.0, length_mm: 2.55, grating_period: None, cover_index: 1.0 }
    }
}

impl CouplerGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("geometry.width_a_um", self.width_a),
            ("geometry.gap_d_um", self.gap_d),
            ("geometry.depth_b_um", self.depth_b),
            ("geometry.length_L_mm", self.length_mm),
            ("geometry.cover_index", self.cover_index),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(p) = self.grating_period {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidInput(format!("grating period must be positive, got {p}")));
            }
        }
        Ok(())
    }

    pub fn length_um(&self) -> f64 {
        self.length_mm * 1e3
    }

    /// Interfaces at `y >= 0`: centre-guide edge, outer-guide inner and outer edge.
    pub fn y_interfaces(&self) -> [f64; 3] {
        let y1 = 0.5 * self.width_a;
        let y2 = y1 + self.gap_d;
        [y1, y2, y2 + self.width_a]
    }

    pub fn y_stack(&self, n_core: f64, n_clad: f64) -> LayerStack {
        let g = |t| Layer { thickness: t, index: n_core };
        let c = |t| Layer { thickness: t, index: n_clad };
        LayerStack::new(
            n_clad,
            vec![g(self.width_a), c(self.gap_d), g(self.width_a), c(self.gap_d), g(self.width_a)],
            n_clad,
        )
    }

    /// Substrate -> core -> cover, bottom to top.
    pub fn z_stack(&self, n_core: f64, n_sub: f64) -> LayerStack {
        LayerStack::new(n_sub, vec![Layer { thickness: self.depth_b, index: n_core }], self.cover_index)
    }
}

/// Scalar problem solved across the width for each polarization.
pub fn y_wave(pol: Polarization) -> Wave {
    match pol {
        Polarization::H => Wave::Tm,
        Polarization::V => Wave::Te,
    }
}

/// Scalar problem solved along the depth for each polarization.
pub fn z_wave(pol: Polarization) -> Wave {
    match pol {
        Polarization::H => Wave::Te,
        Polarization::V => Wave::Tm,
    }
}

pub(crate) fn k0(wavelength_um: f64) -> f64 {
    2.0 * std::f64::consts::PI / wavelength_um
}

/// Signal and idler must see exactly the three coupler supermodes.
pub const SIGNAL_IDLER_MODES: ModeCount = ModeCount::Exactly(3);
/// The pump is multimode; only its two lowest supermodes are ever used.
pub const PUMP_MODES: ModeCount = ModeCount::AtLeast(2);

/// How many guided coupler modes a solve must find.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeCount {
    Exactly(usize),
    AtLeast(usize),
}

impl ModeCount {
    pub fn check(self, found: usize, pol: Polarization, wavelength_um: f64) -> Result<()> {
        let ok = match self {
            ModeCount::Exactly(n) => found == n,
            ModeCount::AtLeast(n) => found >= n,
        };
        if ok {
            return Ok(());
        }
        let expected = match self {
            ModeCount::Exactly(n) | ModeCount::AtLeast(n) => n,
        };
        Err(Error::ModeCount { pol, wavelength_um, found, expected })
    }
}

/// Per-mode diagnostic table, `pol,m,n_eff,beta,residual`.
pub fn modes_csv(modes: &[ChannelMode]) -> String {
    let mut s = String::from("pol,m,n_eff,beta,residual\n");
    for m in modes {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            m.pol,
            m.m,
            crate::format::sig17(m.n_eff),
            crate::format::sig17(m.beta),
            crate::format::sci(m.y_mode.residual.max(m.z_mode.residual)),
        );
    }
    s
}
