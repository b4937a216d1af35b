//! Grating design, efficiency sweeps, crossings and period tolerance.

mod spectrum;

pub use spectrum::{compare_case_bandwidths, find_intersection, fwhm, Axis, BandwidthReport, Crossing, EfficiencySpectrum};

use crate::error::{Error, Result};
use crate::format::sig17;
use crate::material::{MaterialModel, Polarization};
use crate::modesolver::{solve_channel_modes, ChannelMode, CouplerGeometry, ModeCount, PUMP_MODES, SIGNAL_IDLER_MODES};
use crate::spdc::{coefficient, enumerate_processes, idler_wavelength, qpm_frequency, ModeTable, ProcessSpec};
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::{Arc, RwLock};

/// Default signal sweep, nm.
pub const DEFAULT_SIGNAL_RANGE_NM: (f64, f64) = (1250.0, 1450.0);
pub const DEFAULT_SIGNAL_POINTS: usize = 201;
/// Default grating sweep, um^-1.
pub const DEFAULT_GRATING_RANGE: (f64, f64) = (0.89, 0.92);
pub const DEFAULT_GRATING_POINTS: usize = 301;
/// A single grating is considered feasible while the K spread stays below this fraction of the mean.
pub const DEFAULT_SPREAD_LIMIT: f64 = 0.02;
/// Period errors (nm) examined by default in the tolerance study.
pub const DEFAULT_TOLERANCE_STEPS_NM: [f64; 5] = [-100.0, -50.0, 0.0, 50.0, 100.0];

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "QPM_THREADS";

type CacheKey = (u64, Polarization, ModeCount);

/// Solves and caches modes for one material, geometry and pump wavelength.
pub struct Designer {
    pub material: MaterialModel,
    pub geometry: CouplerGeometry,
    pub pump_um: f64,
    pub length_mm: f64,
    /// Common coefficient scale; cancels from every normalised output.
    pub scale: f64,
    cache: RwLock<HashMap<CacheKey, Arc<Vec<ChannelMode>>>>,
    pool: rayon::ThreadPool,
}

/// Grating that serves every process of one case at degeneracy.
#[derive(Debug, Clone, PartialEq)]
pub struct GratingDesign {
    pub pump_mode: usize,
    pub processes: Vec<ProcessSpec>,
    /// Per-process `K_required`, um^-1.
    pub k_values: Vec<f64>,
    /// Mean of `k_values`, um^-1.
    pub grating_k: f64,
    /// `max - min` of `k_values`.
    pub spread: f64,
    pub spread_limit: f64,
    /// Set when `spread > spread_limit * grating_k`.
    pub warning: Option<String>,
}

impl GratingDesign {
    pub fn period_um(&self) -> f64 {
        2.0 * PI / self.grating_k
    }

    pub fn relative_spread(&self) -> f64 {
        self.spread / self.grating_k
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceRow {
    pub delta_period_nm: f64,
    pub period_um: f64,
    pub crossing_nm: Option<f64>,
    pub shift_nm: Option<f64>,
    /// Pump change restoring degeneracy, `-shift/2`.
    pub pump_retune_nm: Option<f64>,
    /// Why the crossing was lost, if it was.
    pub error: Option<String>,
}

/// `delta_lambda_nm,crossing_nm,shift_nm,pump_retune_nm`; lost crossings leave the fields empty.
pub fn tolerance_csv(rows: &[ToleranceRow]) -> String {
    let mut s = String::from("delta_lambda_nm,crossing_nm,shift_nm,pump_retune_nm\n");
    let opt = |v: Option<f64>| v.map(sig17).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            sig17(r.delta_period_nm),
            opt(r.crossing_nm),
            opt(r.shift_nm),
            opt(r.pump_retune_nm)
        );
    }
    s
}

#[derive(Debug, Clone)]
pub struct DesignReport {
    pub grating: GratingDesign,
    pub spectrum: EfficiencySpectrum,
    pub crossing: Option<Crossing>,
    pub crossing_error: Option<String>,
    pub tolerance: Vec<ToleranceRow>,
    /// Contaminating processes: label and efficiency relative to the strongest state term at the crossing.
    pub contamination: Vec<(ProcessSpec, f64)>,
}

impl DesignReport {
    pub fn grating_period_um(&self) -> f64 {
        self.grating.period_um()
    }

    pub fn to_kv(&self) -> String {
        let g = &self.grating;
        let mut s = String::new();
        let _ = writeln!(s, "case = {}", crate::spdc::Case::from_pump_mode(g.pump_mode).map(|c| c.to_string()).unwrap_or_default());
        let _ = writeln!(s, "grating_frequency_um_inv = {}", sig17(g.grating_k));
        let _ = writeln!(s, "grating_period_um = {}", sig17(g.period_um()));
        let _ = writeln!(s, "k_spread_um_inv = {}", sig17(g.spread));
        let _ = writeln!(s, "k_relative_spread = {}", sig17(g.relative_spread()));
        for (p, k) in g.processes.iter().zip(&g.k_values) {
            let _ = writeln!(s, "k_required.{} = {}", p.label(), sig17(*k));
        }
        if let Some(w) = &g.warning {
            let _ = writeln!(s, "warning = {w}");
        }
        match &self.crossing {
            Some(c) => {
                let _ = writeln!(s, "crossing_wavelength_nm = {}", sig17(c.location));
                let _ = writeln!(s, "crossing_spread = {}", sig17(c.spread));
                for (p, e) in self.spectrum.processes.iter().zip(&c.efficiencies) {
                    let _ = writeln!(s, "crossing_efficiency.{} = {}", p.label(), sig17(*e));
                }
            }
            None => {
                let _ = writeln!(s, "crossing_wavelength_nm = none");
                if let Some(e) = &self.crossing_error {
                    let _ = writeln!(s, "crossing_error = {e}");
                }
            }
        }
        for (p, e) in &self.contamination {
            let _ = writeln!(s, "contamination.{} = {}", p.label(), sig17(*e));
        }
        for r in &self.tolerance {
            let opt = |v: Option<f64>| v.map(sig17).unwrap_or_else(|| "none".into());
            let _ = writeln!(
                s,
                "tolerance.{} = crossing {} shift {} pump_retune {}",
                sig17(r.delta_period_nm),
                opt(r.crossing_nm),
                opt(r.shift_nm),
                opt(r.pump_retune_nm)
            );
        }
        s
    }
}

fn thread_count() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0)
}

impl Designer {
    pub fn new(material: MaterialModel, geometry: CouplerGeometry, pump_um: f64) -> Result<Self> {
        material.validate()?;
        geometry.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(thread_count())
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        let length_mm = geometry.length_mm;
        Ok(Self { material, geometry, pump_um, length_mm, scale: 1.0, cache: RwLock::new(HashMap::new()), pool })
    }

    pub fn degenerate_signal_um(&self) -> f64 {
        2.0 * self.pump_um
    }

    /// Cached channel modes; concurrent misses may solve twice and store identical values.
    pub fn modes(&self, wavelength_um: f64, pol: Polarization, count: ModeCount) -> Result<Arc<Vec<ChannelMode>>> {
        let key = (wavelength_um.to_bits(), pol, count);
        if let Some(m) = self.cache.read().expect("mode cache poisoned").get(&key) {
            return Ok(m.clone());
        }
        let m = Arc::new(solve_channel_modes(&self.material, &self.geometry, wavelength_um, pol, count)?);
        self.cache.write().expect("mode cache poisoned").insert(key, m.clone());
        Ok(m)
    }

    pub fn cached_entries(&self) -> usize {
        self.cache.read().expect("mode cache poisoned").len()
    }

    pub fn table(&self, signal_um: f64) -> Result<ModeTable> {
        let idler_um = idler_wavelength(self.pump_um, signal_um)?;
        Ok(ModeTable {
            pump_um: self.pump_um,
            signal_um,
            idler_um,
            pump: self.modes(self.pump_um, ProcessSpec::PUMP_POL, PUMP_MODES)?.to_vec(),
            signal: self.modes(signal_um, ProcessSpec::SIGNAL_POL, SIGNAL_IDLER_MODES)?.to_vec(),
            idler: self.modes(idler_um, ProcessSpec::IDLER_POL, SIGNAL_IDLER_MODES)?.to_vec(),
        })
    }

    fn state_processes(pump_mode: usize) -> Result<Vec<ProcessSpec>> {
        Ok(enumerate_processes(pump_mode)?.into_iter().filter(ProcessSpec::in_state).collect())
    }

    /// Mean `K_required` of the state processes at degeneracy.
    pub fn design_grating(&self, pump_mode: usize, spread_limit: f64) -> Result<GratingDesign> {
        let processes = Self::state_processes(pump_mode)?;
        let table = self.table(self.degenerate_signal_um())?;
        let k_values = processes.iter().map(|p| qpm_frequency(p, &table)).collect::<Result<Vec<_>>>()?;
        let grating_k = k_values.iter().sum::<f64>() / k_values.len() as f64;
        let max = k_values.iter().cloned().fold(f64::MIN, f64::max);
        let min = k_values.iter().cloned().fold(f64::MAX, f64::min);
        let spread = max - min;
        let warning = (spread > spread_limit * grating_k.abs()).then(|| {
            format!(
                "single grating infeasible: K spread {} exceeds {} of the mean {}",
                sig17(spread),
                spread_limit,
                sig17(grating_k)
            )
        });
        if let Some(w) = &warning {
            log::warn!("{w}");
        }
        Ok(GratingDesign { pump_mode, processes, k_values, grating_k, spread, spread_limit, warning })
    }

    /// Relative efficiency of each state process against signal wavelength (nm),
    /// re-solving signal and idler modes at every grid point.
    pub fn sweep_signal_wavelength(
        &self,
        pump_mode: usize,
        grating_k: f64,
        range_nm: (f64, f64),
        n_points: usize,
    ) -> Result<EfficiencySpectrum> {
        let grid = linspace(range_nm, n_points)?;
        let processes = Self::state_processes(pump_mode)?;
        let rows: Vec<Result<Vec<(f64, f64)>>> = self.pool.install(|| {
            grid.par_iter()
                .map(|&nm| {
                    let table = self.table(nm * 1e-3).map_err(|e| at_wavelength(e, nm))?;
                    processes
                        .iter()
                        .map(|p| {
                            let r = coefficient(p, &table, grating_k, self.length_mm, self.scale)?;
                            Ok((r.raw_efficiency(), r.delta_k))
                        })
                        .collect()
                })
                .collect()
        });
        let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(EfficiencySpectrum::from_rows(Axis::SignalWavelength, grid, processes, rows))
    }

    /// Relative efficiency of each state process against grating frequency (um^-1) at a fixed signal wavelength.
    pub fn sweep_grating(
        &self,
        pump_mode: usize,
        signal_um: f64,
        range: (f64, f64),
        n_points: usize,
    ) -> Result<EfficiencySpectrum> {
        let grid = linspace(range, n_points)?;
        let processes = Self::state_processes(pump_mode)?;
        let table = self.table(signal_um)?;
        let rows = grid
            .iter()
            .map(|&k| {
                processes
                    .iter()
                    .map(|p| {
                        let r = coefficient(p, &table, k, self.length_mm, self.scale)?;
                        Ok((r.raw_efficiency(), r.delta_k))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EfficiencySpectrum::from_rows(Axis::GratingFrequency, grid, processes, rows))
    }

    /// Crossing wavelength for each period error, relative to the crossing of the designed grating.
    pub fn grating_tolerance(
        &self,
        pump_mode: usize,
        grating_k: f64,
        deltas_nm: &[f64],
        range_nm: (f64, f64),
        n_points: usize,
    ) -> Result<Vec<ToleranceRow>> {
        let base = self.sweep_signal_wavelength(pump_mode, grating_k, range_nm, n_points)?;
        let base_crossing = find_intersection(&base)?.location;
        let period = 2.0 * PI / grating_k;
        deltas_nm
            .iter()
            .map(|&dl| {
                let p = period + dl * 1e-3;
                let row = |crossing: Option<f64>, error: Option<String>| {
                    let shift = crossing.map(|c| c - base_crossing);
                    ToleranceRow {
                        delta_period_nm: dl,
                        period_um: p,
                        crossing_nm: crossing,
                        shift_nm: shift,
                        pump_retune_nm: shift.map(|s| -0.5 * s + 0.0),
                        error,
                    }
                };
                if dl == 0.0 {
                    return Ok(row(Some(base_crossing), None));
                }
                let spec = self.sweep_signal_wavelength(pump_mode, 2.0 * PI / p, range_nm, n_points)?;
                Ok(match find_intersection(&spec) {
                    Ok(c) => row(Some(c.location), None),
                    Err(e) => row(None, Some(e.to_string())),
                })
            })
            .collect()
    }

    /// Designs the grating, sweeps the signal, locates the crossing and runs the tolerance study.
    pub fn report(
        &self,
        pump_mode: usize,
        range_nm: (f64, f64),
        n_points: usize,
        deltas_nm: &[f64],
        spread_limit: f64,
    ) -> Result<DesignReport> {
        let grating = self.design_grating(pump_mode, spread_limit)?;
        let spectrum = self.sweep_signal_wavelength(pump_mode, grating.grating_k, range_nm, n_points)?;
        let (crossing, crossing_error) = match find_intersection(&spectrum) {
            Ok(c) => (Some(c), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let tolerance = if crossing.is_some() {
            self.grating_tolerance(pump_mode, grating.grating_k, deltas_nm, range_nm, n_points)?
        } else {
            Vec::new()
        };
        let at = crossing.as_ref().map_or(self.degenerate_signal_um() * 1e3, |c| c.location);
        let table = self.table(at * 1e-3)?;
        let all = enumerate_processes(pump_mode)?;
        let results =
            all.iter().map(|p| coefficient(p, &table, grating.grating_k, self.length_mm, self.scale)).collect::<Result<Vec<_>>>()?;
        let strongest = results.iter().filter(|r| r.spec.in_state()).map(|r| r.raw_efficiency()).fold(0.0, f64::max);
        let contamination = results
            .iter()
            .filter(|r| !r.spec.in_state())
            .map(|r| (r.spec, if strongest > 0.0 { r.raw_efficiency() / strongest } else { 0.0 }))
            .collect();
        Ok(DesignReport { grating, spectrum, crossing, crossing_error, tolerance, contamination })
    }
}

fn at_wavelength(e: Error, nm: f64) -> Error {
    match e {
        e @ (Error::ModeCount { .. } | Error::NoMode { .. }) => e,
        other => Error::NonConvergence(format!("at signal {nm} nm: {other}")),
    }
}

fn linspace(range: (f64, f64), n: usize) -> Result<Vec<f64>> {
    let (a, b) = range;
    if n < 2 || !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!("sweep needs lo < hi and at least 2 points, got ({a}, {b}) x {n}")));
    }
    Ok((0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect())
}

/// Free-standing grating design for callers without a [`Designer`].
pub fn design_grating(
    pump_mode: usize,
    geometry: &CouplerGeometry,
    material: &MaterialModel,
    pump_um: f64,
) -> Result<GratingDesign> {
    Designer::new(material.clone(), geometry.clone(), pump_um)?.design_grating(pump_mode, DEFAULT_SPREAD_LIMIT)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let g = linspace((1250.0, 1450.0), 201).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], 1250.0);
        assert_eq!(g[200], 1450.0);
        assert!((g[100] - 1350.0).abs() < 1e-12);
        assert!(linspace((1.0, 1.0), 5).is_err());
        assert!(linspace((0.0, 1.0), 1).is_err());
    }

    #[test]
    fn tolerance_csv_format() {
        let rows = [
            ToleranceRow {
                delta_period_nm: 50.0,
                period_um: 6.97,
                crossing_nm: Some(1360.0),
                shift_nm: Some(10.0),
                pump_retune_nm: Some(-5.0),
                error: None,
            },
            ToleranceRow {
                delta_period_nm: -50.0,
                period_um: 6.87,
                crossing_nm: None,
                shift_nm: None,
                pump_retune_nm: None,
                error: Some("lost".into()),
            },
        ];
        let csv = tolerance_csv(&rows);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "delta_lambda_nm,crossing_nm,shift_nm,pump_retune_nm");
        assert_eq!(lines[1], "50.000000000000000,1360.0000000000000,10.000000000000000,-5.0000000000000000");
        assert_eq!(lines[2], "-50.000000000000000,,,");
    }
}
