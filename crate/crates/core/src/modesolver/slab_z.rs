use super::roots::{bisect, bracket_roots};
use super::{k0, transfer_matrix_oracle, z_wave, CouplerGeometry, Wave, ORACLE_ARBITRATION_TOL, SCAN_POINTS, TAIL_DECAY_LENGTHS};
use crate::error::{Error, Result};
use crate::material::{MaterialModel, Polarization};
use crate::quad::{integrate_segments, QuadOptions};

/// Region amplitudes of the depth profile, in the appendix convention:
/// `G exp(-eta z)` above the surface, `H1 cos(sigma z) + H2 sin(sigma z)` in the
/// core and `J exp(delta z)` in the substrate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZCoefficients {
    pub g: f64,
    pub h1: f64,
    pub h2: f64,
    pub j: f64,
}

/// Fundamental mode of the cover / core / substrate slab.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabModeZ {
    pub pol: Polarization,
    /// Mode order; always 0 in this toolkit.
    pub n: usize,
    pub wavelength_um: f64,
    pub beta_z: f64,
    pub sigma: f64,
    pub eta: f64,
    pub delta: f64,
    pub n_cover: f64,
    pub n_core: f64,
    pub n_sub: f64,
    pub depth_b: f64,
    pub coefficients: ZCoefficients,
    /// Relative residual of the eigenvalue equation at `beta_z`.
    pub residual: f64,
    /// Number of bound depth modes at this wavelength.
    pub bound_modes: usize,
    // field value at z = -b, used for the substrate tail
    j_local: f64,
}

/// Pole-free closed-form depth equation `tan(sigma b) = sigma (ws delta + wc eta)
/// / (sigma^2 - ws wc eta delta)`, returned as `(value, magnitude scale)`.
pub fn slab_z_residual(
    n_eff: f64,
    wavelength_um: f64,
    n_cover: f64,
    n_core: f64,
    n_sub: f64,
    depth_b: f64,
    wave: Wave,
) -> (f64, f64) {
    let k = k0(wavelength_um);
    let beta = k * n_eff;
    let sigma = (k * k * n_core * n_core - beta * beta).max(0.0).sqrt();
    let eta = (beta * beta - k * k * n_cover * n_cover).max(0.0).sqrt();
    let delta = (beta * beta - k * k * n_sub * n_sub).max(0.0).sqrt();
    let (wc, ws) = match wave {
        Wave::Te => (1.0, 1.0),
        Wave::Tm => ((n_core / n_cover).powi(2), (n_core / n_sub).powi(2)),
    };
    let (s, c) = (sigma * depth_b).sin_cos();
    let t1 = (sigma * sigma - ws * wc * eta * delta) * s;
    let t2 = sigma * (ws * delta + wc * eta) * c;
    let scale = (sigma * sigma + ws * wc * eta * delta) * s.abs() + t2.abs();
    (t1 - t2, scale)
}

impl SlabModeZ {
    pub fn k0(&self) -> f64 {
        k0(self.wavelength_um)
    }

    pub fn n_eff(&self) -> f64 {
        self.beta_z / self.k0()
    }

    /// Unnormalised field, `Z(0) = 1`.
    pub fn value(&self, z: f64) -> f64 {
        let c = &self.coefficients;
        if z >= 0.0 {
            c.g * (-self.eta * z).exp()
        } else if z >= -self.depth_b {
            c.h1 * (self.sigma * z).cos() + c.h2 * (self.sigma * z).sin()
        } else {
            self.j_local * (self.delta * (z + self.depth_b)).exp()
        }
    }

    /// Integration breakpoints covering the field down to `exp(-40)` of its edge values.
    pub fn breakpoints(&self) -> Vec<f64> {
        vec![
            -self.depth_b - TAIL_DECAY_LENGTHS / self.delta,
            -self.depth_b,
            0.0,
            TAIL_DECAY_LENGTHS / self.eta,
        ]
    }

    pub fn power(&self) -> Result<f64> {
        integrate_segments(&|z| self.value(z).powi(2), &self.breakpoints(), &QuadOptions::default())
    }
}

pub fn solve_slab_z(
    material: &MaterialModel,
    geometry: &CouplerGeometry,
    wavelength_um: f64,
    pol: Polarization,
) -> Result<SlabModeZ> {
    geometry.validate()?;
    let n_core = material.core_index(wavelength_um, pol)?;
    let n_sub = material.substrate_index(wavelength_um, pol)?;
    let n_cover = geometry.cover_index;
    let wave = z_wave(pol);
    let b = geometry.depth_b;
    let lo = n_sub.max(n_cover);
    if n_core <= lo {
        return Err(Error::NoMode {
            pol,
            wavelength_um,
            detail: format!("core index {n_core} does not exceed cladding indices ({n_sub}, {n_cover})"),
        });
    }
    let f = |x: f64| slab_z_residual(x, wavelength_um, n_cover, n_core, n_sub, b, wave);
    let brackets = bracket_roots(&f, lo, n_core, SCAN_POINTS);
    let closed: Vec<f64> = brackets.iter().rev().map(|&(a, c)| bisect(&|x| f(x).0, a, c)).collect();

    let oracle = transfer_matrix_oracle(&geometry.z_stack(n_core, n_sub), wavelength_um, wave)?;
    if oracle.is_empty() && closed.is_empty() {
        return Err(Error::NoMode {
            pol,
            wavelength_um,
            detail: format!(
                "depth slab below cutoff: scanned n_eff in ({lo:.6}, {n_core:.6}) with {SCAN_POINTS} points, no sign change"
            ),
        });
    }
    let n_eff = match (closed.first(), oracle.first()) {
        (Some(&c), Some(&o)) if (c - o).abs() <= ORACLE_ARBITRATION_TOL => c,
        (c, Some(&o)) => {
            log::warn!(
                "depth slab {pol} at {wavelength_um} um: closed-form root {c:?} disagrees with oracle {o}; using oracle"
            );
            o
        }
        (Some(&c), None) => c,
        (None, None) => unreachable!(),
    };
    let bound_modes = oracle.len().max(closed.len());
    Ok(build(n_eff, wavelength_um, pol, n_cover, n_core, n_sub, b, wave, bound_modes))
}

#[allow(clippy::too_many_arguments)]
fn build(
    n_eff: f64,
    wavelength_um: f64,
    pol: Polarization,
    n_cover: f64,
    n_core: f64,
    n_sub: f64,
    depth_b: f64,
    wave: Wave,
    bound_modes: usize,
) -> SlabModeZ {
    let k = k0(wavelength_um);
    let beta = k * n_eff;
    let sigma = (k * k * n_core * n_core - beta * beta).sqrt();
    let eta = (beta * beta - k * k * n_cover * n_cover).sqrt();
    let delta = (beta * beta - k * k * n_sub * n_sub).sqrt();
    let wc = match wave {
        Wave::Te => 1.0,
        Wave::Tm => (n_core / n_cover).powi(2),
    };
    let g = 1.0;
    let h1 = 1.0;
    let h2 = -wc * eta / sigma;
    let j_local = h1 * (sigma * depth_b).cos() - h2 * (sigma * depth_b).sin();
    let (v, scale) = slab_z_residual(n_eff, wavelength_um, n_cover, n_core, n_sub, depth_b, wave);
    SlabModeZ {
        pol,
        n: 0,
        wavelength_um,
        beta_z: beta,
        sigma,
        eta,
        delta,
        n_cover,
        n_core,
        n_sub,
        depth_b,
        coefficients: ZCoefficients { g, h1, h2, j: j_local * (delta * depth_b).exp() },
        residual: v.abs() / scale,
        bound_modes,
        j_local,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design() -> (MaterialModel, CouplerGeometry) {
        (MaterialModel::default(), CouplerGeometry::default())
    }

    #[test]
    fn bulk_limit() {
        let (m, mut g) = design();
        g.depth_b = 50.0;
        for pol in Polarization::ALL {
            let z = solve_slab_z(&m, &g, 1.35, pol).unwrap();
            let kn2 = z.k0() * z.n_core;
            assert!(z.beta_z < kn2);
            assert!(kn2 - z.beta_z < 1e-4 * kn2, "{} vs {}", z.beta_z, kn2);
        }
    }

    #[test]
    fn design_point_root_is_clean() {
        let (m, g) = design();
        for (l, pol) in [(0.675, Polarization::H), (1.35, Polarization::H), (1.35, Polarization::V)] {
            let z = solve_slab_z(&m, &g, l, pol).unwrap();
            assert!(z.residual < 1e-10, "{l} {pol}: {}", z.residual);
            let k = z.k0();
            assert!(z.beta_z > k * z.n_sub.max(z.n_cover) && z.beta_z < k * z.n_core);
        }
        // the signal/idler wavelength supports one depth mode
        assert_eq!(solve_slab_z(&m, &g, 1.35, Polarization::V).unwrap().bound_modes, 1);
        assert_eq!(solve_slab_z(&m, &g, 1.35, Polarization::H).unwrap().bound_modes, 1);
    }

    #[test]
    fn matches_oracle() {
        let (m, g) = design();
        let pol = Polarization::V;
        let z = solve_slab_z(&m, &g, 1.35, pol).unwrap();
        let stack = g.z_stack(z.n_core, z.n_sub);
        let o = transfer_matrix_oracle(&stack, 1.35, z_wave(pol)).unwrap();
        assert!((o[0] - z.n_eff()).abs() < 1e-9);
    }

    #[test]
    fn field_continuity() {
        let (m, g) = design();
        for pol in Polarization::ALL {
            let z = solve_slab_z(&m, &g, 1.35, pol).unwrap();
            let e = 1e-9;
            for zb in [0.0, -g.depth_b] {
                let (a, b) = (z.value(zb - e), z.value(zb + e));
                assert!((a - b).abs() < 1e-7, "{pol} at {zb}: {a} vs {b}");
            }
            // weighted derivative continuity at the substrate interface
            let h = 1e-6;
            let d_core = (z.value(-g.depth_b + 2.0 * h) - z.value(-g.depth_b + h)) / h;
            let d_sub = (z.value(-g.depth_b - h) - z.value(-g.depth_b - 2.0 * h)) / h;
            let ratio = match z_wave(pol) {
                Wave::Te => 1.0,
                Wave::Tm => (z.n_core / z.n_sub).powi(2),
            };
            assert!((d_core - ratio * d_sub).abs() < 1e-4 * d_core.abs().max(1e-3));
        }
    }

    #[test]
    fn cutoff_reports_no_mode() {
        let (m, mut g) = design();
        g.depth_b = 0.5;
        let err = solve_slab_z(&m, &g, 1.35, Polarization::V).unwrap_err();
        assert!(matches!(err, Error::NoMode { .. }), "{err}");
    }
}
