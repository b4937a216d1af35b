use super::roots::{bisect, bracket_roots};
use super::{
    k0, transfer_matrix_oracle, y_wave, CouplerGeometry, ModeCount, Wave, ORACLE_ARBITRATION_TOL, SCAN_POINTS,
    TAIL_DECAY_LENGTHS,
};
use crate::error::{Error, Result};
use crate::material::{MaterialModel, Polarization};
use crate::quad::{integrate_segments, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

impl Parity {
    pub fn of_mode(m: usize) -> Self {
        if m % 2 == 0 {
            Parity::Symmetric
        } else {
            Parity::Antisymmetric
        }
    }

    /// `+1` for even fields, `-1` for odd ones.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Symmetric => 1.0,
            Parity::Antisymmetric => -1.0,
        }
    }
}

/// Region amplitudes for `y >= 0` (the field at `y < 0` follows from parity):
///
/// ```text
/// F cos(ky) | F sin(ky)           0   <= y < y1
/// D cosh(gy) + E sinh(gy)         y1  <= y < y2
/// B cos(ky) + C sin(ky)           y2  <= y < y3
/// A exp(-gy)                      y3  <= y
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

/// One supermode of the seven-layer coupler slab.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabModeY {
    pub pol: Polarization,
    pub m: usize,
    pub parity: Parity,
    pub wavelength_um: f64,
    pub beta_y: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub n_core: f64,
    pub n_clad: f64,
    pub coefficients: YCoefficients,
    /// Gap-side logarithmic derivative `psi'/psi` at the inner edge of an outer guide.
    pub t1: f64,
    /// Relative residual of the eigenvalue equation at `beta_y`.
    pub residual: f64,
    interfaces: [f64; 3],
    local: Local,
}

// Gap field `c1 exp(-g t) + c2 exp(-g (d - t))` with `t = |y| - y1`, then the
// outer-guide value/slope at y2 and the value at y3. The exponential form
// stays smooth where cosh/sinh would cancel catastrophically across wide gaps.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Local {
    c1: f64,
    c2: f64,
    gap: f64,
    p2: f64,
    q2: f64,
    p3: f64,
}

fn weight(wave: Wave, n_core: f64, n_clad: f64) -> f64 {
    match wave {
        Wave::Te => 1.0,
        Wave::Tm => (n_core / n_clad).powi(2),
    }
}

/// Closed-form coupler dispersion function for one parity family, multiplied
/// through so that it has no poles. Returns `(value, magnitude scale)`.
///
/// The outer guide and the gap are folded into an effective load
/// `R = (tanh(g d) - t1/g) / (1 - (t1/g) tanh(g d))` seen by the centre guide,
/// which then satisfies `(k/g) tan(k a/2) = w R` (symmetric) or
/// `-(k/g) cot(k a/2) = w R` (antisymmetric), with `w = (n_core/n_clad)^2` for
/// the TM-like problem and 1 otherwise.
#[allow(clippy::too_many_arguments)]
pub fn coupler_residual(
    n_eff: f64,
    wavelength_um: f64,
    n_core: f64,
    n_clad: f64,
    width_a: f64,
    gap_d: f64,
    wave: Wave,
    parity: Parity,
) -> (f64, f64) {
    let k = k0(wavelength_um);
    let beta = k * n_eff;
    let kappa = (k * k * n_core * n_core - beta * beta).max(0.0).sqrt();
    let gamma = (beta * beta - k * k * n_clad * n_clad).max(0.0).sqrt();
    let w = weight(wave, n_core, n_clad);
    let u = kappa / gamma;
    let (s, c) = (kappa * width_a).sin_cos();
    let p = u / w * (u * s - w * c);
    let q = u * c + w * s;
    let th = (gamma * gap_d).tanh();
    let nr = q * th - p;
    let dr = q - p * th;
    let (sh, ch) = (0.5 * kappa * width_a).sin_cos();
    let (t1, t2) = match parity {
        Parity::Symmetric => (u * sh * dr, -w * ch * nr),
        Parity::Antisymmetric => (u * ch * dr, w * sh * nr),
    };
    // Same expression with every sum taken over magnitudes, so the relative
    // residual measures backward error instead of internal cancellation.
    let pa = u / w * ((u * s).abs() + (w * c).abs());
    let qa = (u * c).abs() + (w * s).abs();
    let nra = qa * th + pa;
    let dra = qa + pa * th;
    let scale = match parity {
        Parity::Symmetric => (u * sh).abs() * dra + (w * ch).abs() * nra,
        Parity::Antisymmetric => (u * ch).abs() * dra + (w * sh).abs() * nra,
    };
    (t1 + t2, scale)
}

impl SlabModeY {
    pub fn k0(&self) -> f64 {
        k0(self.wavelength_um)
    }

    pub fn n_eff(&self) -> f64 {
        self.beta_y / self.k0()
    }

    pub fn interfaces(&self) -> [f64; 3] {
        self.interfaces
    }

    /// Interface weight `w` relating core-side and cladding-side slopes.
    pub fn weight(&self) -> f64 {
        weight(y_wave(self.pol), self.n_core, self.n_clad)
    }

    /// Unnormalised field; the centre amplitude `F` is 1.
    pub fn value(&self, y: f64) -> f64 {
        let x = y.abs();
        let [y1, y2, y3] = self.interfaces;
        let (k, g, l) = (self.kappa, self.gamma, &self.local);
        let v = if x < y1 {
            match self.parity {
                Parity::Symmetric => (k * x).cos(),
                Parity::Antisymmetric => (k * x).sin(),
            }
        } else if x < y2 {
            let t = x - y1;
            l.c1 * (-g * t).exp() + l.c2 * (-g * (l.gap - t)).exp()
        } else if x < y3 {
            let t = x - y2;
            l.p2 * (k * t).cos() + l.q2 / k * (k * t).sin()
        } else {
            l.p3 * (-g * (x - y3)).exp()
        };
        if y < 0.0 {
            self.parity.sign() * v
        } else {
            v
        }
    }

    /// Region edges over the whole line, padded by 40 decay lengths.
    pub fn breakpoints(&self) -> Vec<f64> {
        let [y1, y2, y3] = self.interfaces;
        let tail = y3 + TAIL_DECAY_LENGTHS / self.gamma;
        vec![-tail, -y3, -y2, -y1, 0.0, y1, y2, y3, tail]
    }

    pub fn power(&self) -> Result<f64> {
        integrate_segments(&|y| self.value(y).powi(2), &self.breakpoints(), &QuadOptions::default())
    }

    /// Power carried outside the three guides (gaps and outer cladding).
    pub fn cladding_power(&self) -> Result<f64> {
        let [y1, y2, y3] = self.interfaces;
        let tail = y3 + TAIL_DECAY_LENGTHS / self.gamma;
        let f = |y: f64| self.value(y).powi(2);
        let opts = QuadOptions::default();
        // even integrand: twice the right half
        Ok(2.0 * (integrate_segments(&f, &[y1, y2], &opts)? + integrate_segments(&f, &[y3, tail], &opts)?))
    }
}

/// Roots of the closed-form eigenvalue equations alone, without oracle
/// arbitration, ordered by decreasing effective index.
pub fn closed_form_roots(
    material: &MaterialModel,
    geometry: &CouplerGeometry,
    wavelength_um: f64,
    pol: Polarization,
) -> Result<Vec<(f64, Parity)>> {
    geometry.validate()?;
    let n_core = material.core_index(wavelength_um, pol)?;
    let n_clad = material.substrate_index(wavelength_um, pol)?;
    let wave = y_wave(pol);
    let (a, d) = (geometry.width_a, geometry.gap_d);
    let mut closed: Vec<(f64, Parity)> = Vec::new();
    if n_core > n_clad {
        for parity in [Parity::Symmetric, Parity::Antisymmetric] {
            let g = |x| coupler_residual(x, wavelength_um, n_core, n_clad, a, d, wave, parity);
            for (lo, hi) in bracket_roots(&g, n_clad, n_core, SCAN_POINTS) {
                closed.push((bisect(&|x| g(x).0, lo, hi), parity));
            }
        }
    }
    closed.sort_by(|p, q| q.0.total_cmp(&p.0));
    Ok(closed)
}

/// The three coupler supermodes, ordered by decreasing `beta_y`.
pub fn solve_coupler_y(
    material: &MaterialModel,
    geometry: &CouplerGeometry,
    wavelength_um: f64,
    pol: Polarization,
) -> Result<Vec<SlabModeY>> {
    solve_coupler_y_with(material, geometry, wavelength_um, pol, ModeCount::Exactly(3))
}

/// All guided coupler supermodes, checked against `count`.
pub fn solve_coupler_y_with(
    material: &MaterialModel,
    geometry: &CouplerGeometry,
    wavelength_um: f64,
    pol: Polarization,
    count: ModeCount,
) -> Result<Vec<SlabModeY>> {
    geometry.validate()?;
    let n_core = material.core_index(wavelength_um, pol)?;
    let n_clad = material.substrate_index(wavelength_um, pol)?;
    let wave = y_wave(pol);
    let (a, d) = (geometry.width_a, geometry.gap_d);
    let f = |x: f64, parity| coupler_residual(x, wavelength_um, n_core, n_clad, a, d, wave, parity);

    let closed = closed_form_roots(material, geometry, wavelength_um, pol)?;

    let oracle = transfer_matrix_oracle(&geometry.y_stack(n_core, n_clad), wavelength_um, wave)?;
    let agrees = closed.len() == oracle.len()
        && closed.iter().zip(&oracle).enumerate().all(|(m, (c, o))| {
            (c.0 - o).abs() <= ORACLE_ARBITRATION_TOL && c.1 == Parity::of_mode(m)
        });
    let roots: Vec<f64> = if agrees {
        closed.iter().map(|c| c.0).collect()
    } else {
        log::warn!(
            "coupler {pol} at {wavelength_um} um: closed-form roots {:?} disagree with oracle {:?}; using oracle",
            closed,
            oracle
        );
        oracle
    };
    count.check(roots.len(), pol, wavelength_um)?;
    if roots.is_empty() {
        return Err(Error::NoMode {
            pol,
            wavelength_um,
            detail: format!("coupler slab guides nothing in n_eff ({n_clad:.6}, {n_core:.6})"),
        });
    }
    Ok(roots
        .iter()
        .enumerate()
        .map(|(m, &n_eff)| {
            let parity = Parity::of_mode(m);
            let (v, scale) = f(n_eff, parity);
            build(n_eff, m, parity, wavelength_um, pol, n_core, n_clad, geometry, v.abs() / scale)
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn build(
    n_eff: f64,
    m: usize,
    parity: Parity,
    wavelength_um: f64,
    pol: Polarization,
    n_core: f64,
    n_clad: f64,
    geometry: &CouplerGeometry,
    residual: f64,
) -> SlabModeY {
    let k = k0(wavelength_um);
    let beta = k * n_eff;
    let kappa = (k * k * n_core * n_core - beta * beta).sqrt();
    let gamma = (beta * beta - k * k * n_clad * n_clad).sqrt();
    let w = weight(y_wave(pol), n_core, n_clad);
    let interfaces = geometry.y_interfaces();
    let [y1, y2, y3] = interfaces;
    let (a, d) = (geometry.width_a, geometry.gap_d);

    let (p1, dcore) = match parity {
        Parity::Symmetric => ((kappa * y1).cos(), -kappa * (kappa * y1).sin()),
        Parity::Antisymmetric => ((kappa * y1).sin(), kappa * (kappa * y1).cos()),
    };
    let q1 = dcore / w;
    let decay = (-gamma * d).exp();
    let c1 = 0.5 * (p1 - q1 / gamma);
    let c2 = 0.5 * (p1 + q1 / gamma) / decay;
    let p2 = c1 * decay + c2;
    let q2 = w * gamma * (c2 - c1 * decay);
    if decay < 1e3 * f64::EPSILON {
        log::warn!(
            "coupler {pol} at {wavelength_um} um: gap of {d} um is {:.0} decay lengths; supermode {m} shape is ill-conditioned",
            gamma * d
        );
    }
    let p3 = p2 * (kappa * a).cos() + q2 / kappa * (kappa * a).sin();

    let u = kappa / gamma;
    let t = (kappa * a).tan();
    let t1 = kappa / w * (u * t - w) / (u + w * t);

    let coefficients = YCoefficients {
        a: p3 * (gamma * y3).exp(),
        b: p2 * (kappa * y2).cos() - q2 / kappa * (kappa * y2).sin(),
        c: p2 * (kappa * y2).sin() + q2 / kappa * (kappa * y2).cos(),
        d: p1 * (gamma * y1).cosh() - q1 / gamma * (gamma * y1).sinh(),
        e: -p1 * (gamma * y1).sinh() + q1 / gamma * (gamma * y1).cosh(),
        f: 1.0,
    };
    SlabModeY {
        pol,
        m,
        parity,
        wavelength_um,
        beta_y: beta,
        kappa,
        gamma,
        n_core,
        n_clad,
        coefficients,
        t1,
        residual,
        interfaces,
        local: Local { c1, c2, gap: d, p2, q2, p3 },
    }
}
