//! Substrate dispersion and the step-index core contrast.

mod calibrate;

pub use calibrate::{
    calibrate_contrast, calibrate_contrast_with, degenerate_k_values, mean_degenerate_k, Calibration, CalibrationOptions,
};

use crate::error::{Error, Result};
use std::fmt;

/// Shortest wavelength (um) at which the embedded dispersion data is trusted.
pub const MIN_WAVELENGTH_UM: f64 = 0.4;
/// Longest wavelength (um) at which the embedded dispersion data is trusted.
pub const MAX_WAVELENGTH_UM: f64 = 2.0;

/// Field orientation of a guided wave in a z-cut crystal.
///
/// `H` has its field along y and sees the ordinary index; `V` has its field
/// along z (the optic axis) and sees the extraordinary index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::H, Polarization::V];

    pub fn as_str(self) -> &'static str {
        match self {
            Polarization::H => "H",
            Polarization::V => "V",
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Three-pole style Sellmeier law `n^2 = 1 + sum_k A_k l^2 / (l^2 - B_k)` with
/// `l` in micrometres, `A_k` dimensionless and `B_k` in um^2.
#[derive(Debug, Clone, PartialEq)]
pub struct Sellmeier {
    terms: Vec<(f64, f64)>,
}

impl Sellmeier {
    pub fn new(terms: Vec<(f64, f64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("Sellmeier law needs at least one term".into()));
        }
        if terms.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidInput("non-finite Sellmeier coefficient".into()));
        }
        Ok(Self { terms })
    }

    /// Parses the flat `A1,B1,A2,B2,...` form used in config files.
    pub fn from_flat(coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "Sellmeier list needs (A, B) pairs, got {} numbers",
                coeffs.len()
            )));
        }
        Self::new(coeffs.chunks(2).map(|c| (c[0], c[1])).collect())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.terms.iter().flat_map(|&(a, b)| [a, b]).collect()
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    /// Refractive index at `wavelength_um`, without range checks.
    pub fn index(&self, wavelength_um: f64) -> f64 {
        let l2 = wavelength_um * wavelength_um;
        let sum: f64 = self.terms.iter().map(|&(a, b)| a * l2 / (l2 - b)).sum();
        (1.0 + sum).sqrt()
    }
}

/// Dispersion fits for lithium niobate at room temperature (21 C), from the
/// infrared-corrected Sellmeier study of Zelmon, Small and Jundt (JOSA B 14,
/// 3319, 1997). Both the congruent and the 5 mol% MgO-doped fits are carried.
pub mod lithium_niobate {
    /// 5% MgO-doped, ordinary ray.
    pub const MGO_ORDINARY: [(f64, f64); 3] = [(2.4272, 0.01478), (1.4617, 0.05612), (9.6536, 371.216)];
    /// 5% MgO-doped, extraordinary ray.
    pub const MGO_EXTRAORDINARY: [(f64, f64); 3] = [(2.2454, 0.01242), (1.3005, 0.05313), (6.8972, 331.33)];
    /// Congruent, ordinary ray.
    pub const CONGRUENT_ORDINARY: [(f64, f64); 3] = [(2.6734, 0.01764), (1.2290, 0.05914), (12.614, 474.60)];
    /// Congruent, extraordinary ray.
    pub const CONGRUENT_EXTRAORDINARY: [(f64, f64); 3] = [(2.9804, 0.02047), (0.5981, 0.0666), (8.9543, 416.08)];
}

/// Bulk dispersion of the substrate plus a wavelength-independent step contrast
/// for the guiding core, one per polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialModel {
    pub sellmeier_ordinary: Sellmeier,
    pub sellmeier_extraordinary: Sellmeier,
    pub delta_n_h: f64,
    pub delta_n_v: f64,
    /// Nonlinear coefficient, pm/V. Only ever used as an overall scale.
    pub d24: f64,
}

/// Contrast pair that puts the mean degenerate case-A grating frequency of the
/// default 6/6/7 um coupler at 0.9074 um^-1 for a 675 nm pump.
pub const CALIBRATED_CONTRAST: (f64, f64) = (0.001_517_078_866_336_118_8, 0.002_534_431_343_574_317_6);

impl Default for MaterialModel {
    fn default() -> Self {
        Self::mgo_lithium_niobate(CALIBRATED_CONTRAST.0, CALIBRATED_CONTRAST.1)
    }
}

impl MaterialModel {
    pub fn mgo_lithium_niobate(delta_n_h: f64, delta_n_v: f64) -> Self {
        Self {
            sellmeier_ordinary: Sellmeier { terms: lithium_niobate::MGO_ORDINARY.to_vec() },
            sellmeier_extraordinary: Sellmeier { terms: lithium_niobate::MGO_EXTRAORDINARY.to_vec() },
            delta_n_h,
            delta_n_v,
            d24: 1.0,
        }
    }

    pub fn congruent_lithium_niobate(delta_n_h: f64, delta_n_v: f64) -> Self {
        Self {
            sellmeier_ordinary: Sellmeier { terms: lithium_niobate::CONGRUENT_ORDINARY.to_vec() },
            sellmeier_extraordinary: Sellmeier {
                terms: lithium_niobate::CONGRUENT_EXTRAORDINARY.to_vec(),
            },
            delta_n_h,
            delta_n_v,
            d24: 1.0,
        }
    }

    pub fn with_contrast(&self, delta_n_h: f64, delta_n_v: f64) -> Self {
        Self { delta_n_h, delta_n_v, ..self.clone() }
    }

    pub fn contrast(&self, pol: Polarization) -> f64 {
        match pol {
            Polarization::H => self.delta_n_h,
            Polarization::V => self.delta_n_v,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (what, v) in [("material.delta_n_h", self.delta_n_h), ("material.delta_n_v", self.delta_n_v)] {
            if !(v >= 0.0 && v < 0.1) {
                return Err(Error::OutOfRange { what, value: v, lo: 0.0, hi: 0.1 });
            }
        }
        if !self.d24.is_finite() {
            return Err(Error::InvalidInput("material.d24 must be finite".into()));
        }
        Ok(())
    }

    pub fn substrate_index(&self, wavelength_um: f64, pol: Polarization) -> Result<f64> {
        check_wavelength(wavelength_um)?;
        let law = match pol {
            Polarization::H => &self.sellmeier_ordinary,
            Polarization::V => &self.sellmeier_extraordinary,
        };
        Ok(law.index(wavelength_um))
    }

    pub fn core_index(&self, wavelength_um: f64, pol: Polarization) -> Result<f64> {
        Ok(self.substrate_index(wavelength_um, pol)? + self.contrast(pol))
    }
}

fn check_wavelength(wavelength_um: f64) -> Result<()> {
    if !(MIN_WAVELENGTH_UM..=MAX_WAVELENGTH_UM).contains(&wavelength_um) {
        return Err(Error::OutOfRange {
            what: "wavelength (um)",
            value: wavelength_um,
            lo: MIN_WAVELENGTH_UM,
            hi: MAX_WAVELENGTH_UM,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Golden values from an independent 30-digit evaluation of the published fits.
    const MGO_NO_675: f64 = 2.272_387_057_077_138_7;
    const MGO_NE_1350: f64 = 2.135_932_965_893_908_3;
    const CLN_NO_675: f64 = 2.276_240_183_223_957_5;
    const CLN_NE_1350: f64 = 2.143_746_067_171_331_7;

    #[test]
    fn golden_indices() {
        let m = MaterialModel::mgo_lithium_niobate(0.0, 0.0);
        assert!((m.substrate_index(0.675, Polarization::H).unwrap() - MGO_NO_675).abs() < 1e-14);
        assert!((m.substrate_index(1.35, Polarization::V).unwrap() - MGO_NE_1350).abs() < 1e-14);
        let c = MaterialModel::congruent_lithium_niobate(0.0, 0.0);
        assert!((c.substrate_index(0.675, Polarization::H).unwrap() - CLN_NO_675).abs() < 1e-14);
        assert!((c.substrate_index(1.35, Polarization::V).unwrap() - CLN_NE_1350).abs() < 1e-14);
    }

    #[test]
    fn deterministic() {
        let m = MaterialModel::default();
        let a = m.substrate_index(1.2345, Polarization::V).unwrap();
        let b = m.substrate_index(1.2345, Polarization::V).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn window_is_enforced() {
        let m = MaterialModel::default();
        let err = m.substrate_index(0.3, Polarization::H).unwrap_err();
        assert!(err.to_string().contains("[0.4, 2]"), "{err}");
        assert!(m.core_index(2.5, Polarization::V).is_err());
    }

    #[test]
    fn core_adds_contrast() {
        let m = MaterialModel::default().with_contrast(0.0, 0.003);
        let l = 0.675;
        assert_eq!(
            m.core_index(l, Polarization::H).unwrap(),
            m.substrate_index(l, Polarization::H).unwrap()
        );
        let m = m.with_contrast(0.01, 0.003);
        assert_eq!(m.core_index(l, Polarization::H).unwrap(), MGO_NO_675 + 0.01);
    }

    #[test]
    fn contrast_is_wavelength_independent() {
        let m = MaterialModel::default().with_contrast(0.0123, 0.0456);
        for i in 0..50 {
            let l = 0.45 + 0.03 * i as f64;
            for pol in Polarization::ALL {
                let d = m.core_index(l, pol).unwrap() - m.substrate_index(l, pol).unwrap();
                assert!((d - m.contrast(pol)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn birefringence_and_normal_dispersion() {
        for m in [MaterialModel::mgo_lithium_niobate(0.0, 0.0), MaterialModel::congruent_lithium_niobate(0.0, 0.0)] {
            for i in 0..=200 {
                let l = 0.4 + 1.6 * i as f64 / 200.0;
                let no = m.substrate_index(l, Polarization::H).unwrap();
                let ne = m.substrate_index(l, Polarization::V).unwrap();
                assert!(no > ne && ne > 1.0, "ordering flipped at {l}");
            }
            let grid: Vec<f64> = (0..100).map(|i| 0.6 + i as f64 / 99.0).collect();
            for pol in Polarization::ALL {
                let n: Vec<f64> = grid.iter().map(|&l| m.substrate_index(l, pol).unwrap()).collect();
                assert!(n.windows(2).all(|w| w[1] < w[0]));
            }
        }
    }

    #[test]
    fn flat_sellmeier_round_trip() {
        let s = Sellmeier::from_flat(&[1.0, 0.1, 2.0, 0.2]).unwrap();
        assert_eq!(s.to_flat(), vec![1.0, 0.1, 2.0, 0.2]);
        assert!(Sellmeier::from_flat(&[1.0, 0.1, 2.0]).is_err());
    }
}
