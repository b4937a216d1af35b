use super::{k0, solve_coupler_y_with, solve_slab_z, CouplerGeometry, ModeCount, SlabModeY, SlabModeZ};
use crate::error::{Error, Result};
use crate::material::{MaterialModel, Polarization};
use crate::quad::{integrate_segments, QuadOptions};

/// A guided channel mode `u(y, z) = norm * Y(y) * Z(z)` with `∬ u^2 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMode {
    pub pol: Polarization,
    pub m: usize,
    pub wavelength_um: f64,
    /// Propagation constant including the corner correction, rad/um.
    pub beta: f64,
    pub n_eff: f64,
    /// Corner correction added to `beta^2`, rad^2/um^2.
    pub delta_beta: f64,
    pub y_mode: SlabModeY,
    pub z_mode: SlabModeZ,
    pub norm: f64,
    norm_y: f64,
    norm_z: f64,
}

impl ChannelMode {
    /// Normalised field at `(y, z)`; `z = 0` is the surface and the guide occupies `-b < z < 0`.
    pub fn field_at(&self, y: f64, z: f64) -> f64 {
        self.y(y) * self.z(z)
    }

    /// Unit-power width profile.
    pub fn y(&self, y: f64) -> f64 {
        self.norm_y * self.y_mode.value(y)
    }

    /// Unit-power depth profile.
    pub fn z(&self, z: f64) -> f64 {
        self.norm_z * self.z_mode.value(z)
    }

    /// `∬ u^2 dy dz` by nested quadrature over all region rectangles.
    pub fn power_2d(&self) -> Result<f64> {
        let opts = QuadOptions::default();
        let zb = self.z_mode.breakpoints();
        let inner = |y: f64| {
            integrate_segments(&|z: f64| self.field_at(y, z).powi(2), &zb, &opts).unwrap_or(f64::NAN)
        };
        let v = integrate_segments(&inner, &self.y_mode.breakpoints(), &opts)?;
        if v.is_nan() {
            return Err(Error::Quadrature { lo: zb[0], hi: zb[zb.len() - 1], change: f64::NAN });
        }
        Ok(v)
    }
}

/// `beta^2 = beta_y^2 + beta_z^2 - k0^2 n_core^2 + correction`.
pub fn composed_beta(beta_y: f64, beta_z: f64, k0: f64, n_core: f64, correction: f64) -> Result<f64> {
    let b2 = beta_y * beta_y + beta_z * beta_z - k0 * k0 * n_core * n_core + correction;
    if !(b2 > 0.0) {
        return Err(Error::Composition(format!("beta^2 = {b2:e} is not positive")));
    }
    Ok(b2.sqrt())
}

/// First-order correction to `beta^2` for the four corner regions, where the
/// separable profile falls short of the true index by `n_core^2 - n_sub^2`:
/// `k0^2 Δ ∬_corners u^2 / ∬ u^2`.
pub fn perturbation_correction(
    y_mode: &SlabModeY,
    z_mode: &SlabModeZ,
    material: &MaterialModel,
    geometry: &CouplerGeometry,
    wavelength_um: f64,
    pol: Polarization,
) -> Result<f64> {
    let n2 = material.core_index(wavelength_um, pol)?;
    let n3 = material.substrate_index(wavelength_um, pol)?;
    let delta = n2 * n2 - n3 * n3;
    if delta == 0.0 {
        return Ok(0.0);
    }
    // u is separable, so each corner integral factorises into 1D integrals.
    let fy = y_mode.cladding_power()? / y_mode.power()?;
    let opts = QuadOptions::default();
    let zb = z_mode.breakpoints();
    let zf = |z: f64| z_mode.value(z).powi(2);
    let core = integrate_segments(&zf, &[-geometry.depth_b, 0.0], &opts)?;
    let total = integrate_segments(&zf, &zb, &opts)?;
    let fz = (total - core) / total;
    let k = k0(wavelength_um);
    Ok(k * k * delta * fy * fz)
}

pub fn compose_channel_mode(y_mode: &SlabModeY, z_mode: &SlabModeZ, correction: f64) -> Result<ChannelMode> {
    if y_mode.pol != z_mode.pol {
        return Err(Error::Composition(format!("polarization mismatch: {} vs {}", y_mode.pol, z_mode.pol)));
    }
    if y_mode.wavelength_um != z_mode.wavelength_um {
        return Err(Error::Composition(format!(
            "wavelength mismatch: {} vs {} um",
            y_mode.wavelength_um, z_mode.wavelength_um
        )));
    }
    let k = y_mode.k0();
    let beta = composed_beta(y_mode.beta_y, z_mode.beta_z, k, y_mode.n_core, correction)?;
    let norm_y = 1.0 / y_mode.power()?.sqrt();
    let norm_z = 1.0 / z_mode.power()?.sqrt();
    Ok(ChannelMode {
        pol: y_mode.pol,
        m: y_mode.m,
        wavelength_um: y_mode.wavelength_um,
        beta,
        n_eff: beta / k,
        delta_beta: correction,
        y_mode: y_mode.clone(),
        z_mode: z_mode.clone(),
        norm: norm_y * norm_z,
        norm_y,
        norm_z,
    })
}

/// Channel modes built on every coupler supermode and the fundamental depth mode.
pub fn solve_channel_modes(
    material: &MaterialModel,
    geometry: &CouplerGeometry,
    wavelength_um: f64,
    pol: Polarization,
    count: ModeCount,
) -> Result<Vec<ChannelMode>> {
    let ys = solve_coupler_y_with(material, geometry, wavelength_um, pol, count)?;
    let z = solve_slab_z(material, geometry, wavelength_um, pol)?;
    ys.iter()
        .map(|y| {
            let c = perturbation_correction(y, &z, material, geometry, wavelength_um, pol)?;
            compose_channel_mode(y, &z, c)
        })
        .collect()
}
