use super::{Case, ProcessResult, ProcessSpec};
use crate::error::{Error, Result};
use crate::format::sig17;
use num_complex::Complex64;
use std::fmt::Write as _;

/// Terms with `|amp|^2` above this count towards the dimensionality.
pub const DEFAULT_DIMENSION_THRESHOLD: f64 = 0.01;

/// Output waveguide reached adiabatically by a supermode: the mode with the
/// largest propagation constant leaves through guide I.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    I,
    II,
    III,
}

impl Port {
    pub fn from_mode(m: usize) -> Option<Self> {
        [Port::I, Port::II, Port::III].get(m).copied()
    }

    pub fn mode(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Port::I => "I",
            Port::II => "II",
            Port::III => "III",
        }
    }
}

/// Whether term labels refer to coupler supermodes or to output guides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    NormalModes,
    Ports,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateTerm {
    pub spec: ProcessSpec,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiphotonState {
    pub case: Case,
    pub basis: Basis,
    pub terms: Vec<StateTerm>,
    pub normalized: bool,
}

impl BiphotonState {
    /// Normalises raw amplitudes; fails if they all vanish.
    pub fn new(case: Case, terms: Vec<(ProcessSpec, Complex64)>) -> Result<Self> {
        let total: f64 = terms.iter().map(|t| t.1.norm_sqr()).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::DegenerateState);
        }
        let inv = 1.0 / total.sqrt();
        Ok(Self {
            case,
            basis: Basis::NormalModes,
            terms: terms.into_iter().map(|(spec, a)| StateTerm { spec, amplitude: a * inv }).collect(),
            normalized: true,
        })
    }

    /// Keeps the state terms of `results` and uses their scale-free `F` as amplitudes.
    pub fn from_results(results: &[ProcessResult]) -> Result<Self> {
        let case = results.first().map(|r| r.spec.case).ok_or(Error::DegenerateState)?;
        let terms = results.iter().filter(|r| r.spec.in_state()).map(|r| (r.spec, r.f_value)).collect();
        Self::new(case, terms)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.amplitude.norm_sqr()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// `|sum_k amp_k / sqrt(D)|^2`, phases included.
    pub fidelity_to_uniform: f64,
    /// Best fidelity to a uniform state after local phase corrections, `(sum_k |amp_k|)^2 / D`.
    pub max_local_fidelity: f64,
    /// `-sum_k p_k log2 p_k`, bits.
    pub schmidt_entropy: f64,
    pub dimensionality: usize,
}

impl Metrics {
    pub fn to_kv(&self) -> String {
        format!(
            "fidelity_to_uniform = {}\nmax_local_fidelity = {}\nschmidt_entropy_bits = {}\ndimensionality = {}\n",
            sig17(self.fidelity_to_uniform),
            sig17(self.max_local_fidelity),
            sig17(self.schmidt_entropy),
            self.dimensionality
        )
    }
}

pub fn entanglement_metrics(state: &BiphotonState, threshold: f64) -> Result<Metrics> {
    let n = state.norm_sqr();
    if !state.normalized || (n - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(n));
    }
    let d = state.terms.len() as f64;
    let sum: Complex64 = state.terms.iter().map(|t| t.amplitude).sum();
    let abs_sum: f64 = state.terms.iter().map(|t| t.amplitude.norm()).sum();
    // Relative to the computed norm so that a lone term has p = 1 exactly.
    let p: Vec<f64> = state.probabilities().iter().map(|x| x / n).collect();
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum();
    Ok(Metrics {
        fidelity_to_uniform: (sum.norm_sqr() / d).min(1.0),
        max_local_fidelity: (abs_sum * abs_sum / d).min(1.0),
        schmidt_entropy: if h > 0.0 { h } else { 0.0 },
        dimensionality: p.iter().filter(|&&x| x > threshold).count(),
    })
}

/// Relabels supermodes as output guides (0 -> I, 1 -> II, 2 -> III).
pub fn port_mapping(state: &BiphotonState) -> BiphotonState {
    BiphotonState { basis: Basis::Ports, ..state.clone() }
}

/// Undoes [`port_mapping`].
pub fn inverse_port_mapping(state: &BiphotonState) -> BiphotonState {
    BiphotonState { basis: Basis::NormalModes, ..state.clone() }
}

/// `case,term,signal_mode,idler_mode,re_amp,im_amp,prob`; in the port basis the
/// mode columns carry guide labels.
pub fn state_csv(state: &BiphotonState) -> String {
    let mut s = String::from("case,term,signal_mode,idler_mode,re_amp,im_amp,prob\n");
    for (k, t) in state.terms.iter().enumerate() {
        let label = |m: usize| match state.basis {
            Basis::NormalModes => m.to_string(),
            Basis::Ports => Port::from_mode(m).map_or_else(|| m.to_string(), |p| p.as_str().to_string()),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            state.case,
            k + 1,
            label(t.spec.signal_mode),
            label(t.spec.idler_mode),
            sig17(t.amplitude.re),
            sig17(t.amplitude.im),
            sig17(t.amplitude.norm_sqr())
        );
    }
    s
}
