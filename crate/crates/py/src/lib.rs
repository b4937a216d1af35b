//! Python bindings for the tricoupler design toolkit.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::f64::consts::PI;
use tricoupler::design::{self, find_intersection, EfficiencySpectrum};
use tricoupler::material::{calibrate_contrast_with, CalibrationOptions};
use tricoupler::modesolver::{self, ModeCount};
use tricoupler::spdc::{self, BiphotonState, Case};
use tricoupler::{Error, Polarization};

create_exception!(tricoupler_py, SolverError, PyException, "A mode solve or quadrature failed.");
create_exception!(tricoupler_py, DesignError, PyException, "A design step (crossing, calibration, state) failed.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::UnknownKey(_) | Error::InvalidInput(_) | Error::UnsupportedPump(_) => {
            PyValueError::new_err(e.to_string())
        }
        e if e.is_solver() => SolverError::new_err(e.to_string()),
        e => DesignError::new_err(e.to_string()),
    }
}

fn pol(s: &str) -> PyResult<Polarization> {
    match s {
        "H" | "h" => Ok(Polarization::H),
        "V" | "v" => Ok(Polarization::V),
        _ => Err(PyValueError::new_err(format!("polarization must be 'H' or 'V', got {s:?}"))),
    }
}

/// Substrate dispersion plus per-polarization step contrast.
#[pyclass(name = "Material", module = "tricoupler_py", from_py_object)]
#[derive(Clone)]
pub struct PyMaterial {
    inner: tricoupler::MaterialModel,
}

#[pymethods]
impl PyMaterial {
    /// `sellmeier_set` is "mgo" or "congruent"; contrasts default to the calibrated pair.
    #[new]
    #[pyo3(signature = (sellmeier_set = "mgo", delta_n_h = None, delta_n_v = None))]
    fn new(sellmeier_set: &str, delta_n_h: Option<f64>, delta_n_v: Option<f64>) -> PyResult<Self> {
        let (h, v) = tricoupler::material::CALIBRATED_CONTRAST;
        let (h, v) = (delta_n_h.unwrap_or(h), delta_n_v.unwrap_or(v));
        let inner = match sellmeier_set {
            "mgo" => tricoupler::MaterialModel::mgo_lithium_niobate(h, v),
            "congruent" => tricoupler::MaterialModel::congruent_lithium_niobate(h, v),
            other => return Err(PyValueError::new_err(format!("unknown Sellmeier set {other:?}"))),
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn delta_n_h(&self) -> f64 {
        self.inner.delta_n_h
    }

    #[getter]
    fn delta_n_v(&self) -> f64 {
        self.inner.delta_n_v
    }

    fn with_contrast(&self, delta_n_h: f64, delta_n_v: f64) -> PyResult<Self> {
        let inner = self.inner.with_contrast(delta_n_h, delta_n_v);
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    fn substrate_index(&self, wavelength_um: f64, polarization: &str) -> PyResult<f64> {
        self.inner.substrate_index(wavelength_um, pol(polarization)?).map_err(to_py)
    }

    fn core_index(&self, wavelength_um: f64, polarization: &str) -> PyResult<f64> {
        self.inner.core_index(wavelength_um, pol(polarization)?).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Material(delta_n_h={}, delta_n_v={})", self.inner.delta_n_h, self.inner.delta_n_v)
    }
}

/// Three identical guides: width, edge-to-edge gap and depth in um, length in mm.
#[pyclass(name = "Geometry", module = "tricoupler_py", from_py_object)]
#[derive(Clone)]
pub struct PyGeometry {
    inner: modesolver::CouplerGeometry,
}

#[pymethods]
impl PyGeometry {
    #[new]
    #[pyo3(signature = (width_a = 6.0, gap_d = 6.0, depth_b = 7.0, length_mm = 2.55, cover_index = 1.0))]
    fn new(width_a: f64, gap_d: f64, depth_b: f64, length_mm: f64, cover_index: f64) -> PyResult<Self> {
        let inner =
            modesolver::CouplerGeometry { width_a, gap_d, depth_b, length_mm, grating_period: None, cover_index };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn width_a(&self) -> f64 {
        self.inner.width_a
    }

    #[getter]
    fn gap_d(&self) -> f64 {
        self.inner.gap_d
    }

    #[getter]
    fn depth_b(&self) -> f64 {
        self.inner.depth_b
    }

    #[getter]
    fn length_mm(&self) -> f64 {
        self.inner.length_mm
    }

    fn __repr__(&self) -> String {
        let g = &self.inner;
        format!("Geometry(width_a={}, gap_d={}, depth_b={}, length_mm={})", g.width_a, g.gap_d, g.depth_b, g.length_mm)
    }
}

/// One composed channel mode.
#[pyclass(name = "Mode", module = "tricoupler_py", frozen)]
pub struct PyMode {
    inner: tricoupler::ChannelMode,
}

#[pymethods]
impl PyMode {
    #[getter]
    fn polarization(&self) -> &'static str {
        self.inner.pol.as_str()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn wavelength_um(&self) -> f64 {
        self.inner.wavelength_um
    }

    #[getter]
    fn n_eff(&self) -> f64 {
        self.inner.n_eff
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn delta_beta(&self) -> f64 {
        self.inner.delta_beta
    }

    /// Worst of the width and depth eigenvalue residuals.
    #[getter]
    fn residual(&self) -> f64 {
        self.inner.y_mode.residual.max(self.inner.z_mode.residual)
    }

    /// Normalised field at (y, z) in um; the surface is z = 0.
    fn field(&self, y: f64, z: f64) -> f64 {
        self.inner.field_at(y, z)
    }

    fn __repr__(&self) -> String {
        format!("Mode({}{}, n_eff={:.10})", self.inner.pol.as_str(), self.inner.m, self.inner.n_eff)
    }
}

/// Channel modes at one wavelength. `count` of None accepts any number of guided modes.
#[pyfunction]
#[pyo3(signature = (material, geometry, wavelength_um, polarization, count = Some(3)))]
fn solve_modes(
    material: &PyMaterial,
    geometry: &PyGeometry,
    wavelength_um: f64,
    polarization: &str,
    count: Option<usize>,
) -> PyResult<Vec<PyMode>> {
    let count = count.map_or(ModeCount::AtLeast(1), ModeCount::Exactly);
    let modes = modesolver::solve_channel_modes(&material.inner, &geometry.inner, wavelength_um, pol(polarization)?, count)
        .map_err(to_py)?;
    Ok(modes.into_iter().map(|inner| PyMode { inner }).collect())
}

/// `(label, signal_mode, idler_mode, in_state)` for each parity-allowed process.
#[pyfunction]
fn enumerate_processes(pump_mode: usize) -> PyResult<Vec<(String, usize, usize, bool)>> {
    Ok(spdc::enumerate_processes(pump_mode)
        .map_err(to_py)?
        .iter()
        .map(|p| (p.label(), p.signal_mode, p.idler_mode, p.in_state()))
        .collect())
}

/// Entanglement metrics of a list of raw amplitudes (normalised here).
#[pyfunction]
#[pyo3(signature = (amplitudes, threshold = spdc::DEFAULT_DIMENSION_THRESHOLD))]
fn entanglement_metrics<'py>(
    py: Python<'py>,
    amplitudes: Vec<Complex64>,
    threshold: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let specs = spdc::enumerate_processes(0).map_err(to_py)?;
    if amplitudes.is_empty() || amplitudes.len() > specs.len() {
        return Err(PyValueError::new_err(format!("expected 1 to {} amplitudes", specs.len())));
    }
    let state = BiphotonState::new(Case::A, specs.into_iter().zip(amplitudes).collect()).map_err(to_py)?;
    metrics_dict(py, &state, threshold)
}

fn metrics_dict<'py>(py: Python<'py>, state: &BiphotonState, threshold: f64) -> PyResult<Bound<'py, PyDict>> {
    let m = spdc::entanglement_metrics(state, threshold).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("fidelity_to_uniform", m.fidelity_to_uniform)?;
    d.set_item("max_local_fidelity", m.max_local_fidelity)?;
    d.set_item("schmidt_entropy", m.schmidt_entropy)?;
    d.set_item("dimensionality", m.dimensionality)?;
    Ok(d)
}

/// Fits (delta_n_h, delta_n_v) so the mean degenerate case-A grating frequency hits `target_k`.
#[pyfunction]
#[pyo3(signature = (material, geometry, target_k = 0.9074, pump_um = 0.675, spread_weight = 1.0))]
fn calibrate<'py>(
    py: Python<'py>,
    material: &PyMaterial,
    geometry: &PyGeometry,
    target_k: f64,
    pump_um: f64,
    spread_weight: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = CalibrationOptions { spread_weight, ..CalibrationOptions::default() };
    let c = py
        .detach(|| calibrate_contrast_with(&material.inner, &geometry.inner, target_k, pump_um, &opts))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("delta_n_h", c.delta_n_h)?;
    d.set_item("delta_n_v", c.delta_n_v)?;
    d.set_item("k_values", c.k_values.to_vec())?;
    d.set_item("mean_k", c.mean_k)?;
    d.set_item("residual", c.residual)?;
    d.set_item("material", PyMaterial { inner: c.apply(&material.inner) })?;
    Ok(d)
}

fn spectrum_dict<'py>(py: Python<'py>, s: &EfficiencySpectrum) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("grid", s.grid.clone())?;
    d.set_item("labels", s.processes.iter().map(|p| p.label()).collect::<Vec<_>>())?;
    d.set_item("efficiency", s.per_process.clone())?;
    d.set_item("delta_k", s.delta_k.clone())?;
    d.set_item("fwhm", s.widths())?;
    match find_intersection(s) {
        Ok(c) => {
            d.set_item("crossing", c.location)?;
            d.set_item("crossing_spread", c.spread)?;
        }
        Err(_) => {
            d.set_item("crossing", py.None())?;
            d.set_item("crossing_spread", py.None())?;
        }
    }
    d.set_item("csv", s.to_csv())?;
    Ok(d)
}

/// Cached mode solves and the design pipeline for one pump wavelength.
#[pyclass(name = "Designer", module = "tricoupler_py", frozen)]
pub struct PyDesigner {
    inner: design::Designer,
}

#[pymethods]
impl PyDesigner {
    #[new]
    #[pyo3(signature = (material, geometry, pump_um = 0.675))]
    fn new(material: &PyMaterial, geometry: &PyGeometry, pump_um: f64) -> PyResult<Self> {
        let inner = design::Designer::new(material.inner.clone(), geometry.inner.clone(), pump_um).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Mean grating frequency of the state processes at degeneracy.
    #[pyo3(signature = (pump_mode = 0, spread_limit = design::DEFAULT_SPREAD_LIMIT))]
    fn design_grating<'py>(&self, py: Python<'py>, pump_mode: usize, spread_limit: f64) -> PyResult<Bound<'py, PyDict>> {
        let g = py.detach(|| self.inner.design_grating(pump_mode, spread_limit)).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("grating_k", g.grating_k)?;
        d.set_item("period_um", g.period_um())?;
        d.set_item("k_values", g.k_values.clone())?;
        d.set_item("labels", g.processes.iter().map(|p| p.label()).collect::<Vec<_>>())?;
        d.set_item("relative_spread", g.relative_spread())?;
        d.set_item("warning", g.warning.clone())?;
        Ok(d)
    }

    #[pyo3(signature = (pump_mode, grating_k, lo_nm = 1250.0, hi_nm = 1450.0, n_points = 201))]
    fn sweep_signal_wavelength<'py>(
        &self,
        py: Python<'py>,
        pump_mode: usize,
        grating_k: f64,
        lo_nm: f64,
        hi_nm: f64,
        n_points: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let s = py
            .detach(|| self.inner.sweep_signal_wavelength(pump_mode, grating_k, (lo_nm, hi_nm), n_points))
            .map_err(to_py)?;
        spectrum_dict(py, &s)
    }

    #[pyo3(signature = (pump_mode, signal_um, lo = 0.89, hi = 0.92, n_points = 301))]
    fn sweep_grating<'py>(
        &self,
        py: Python<'py>,
        pump_mode: usize,
        signal_um: f64,
        lo: f64,
        hi: f64,
        n_points: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let s = py.detach(|| self.inner.sweep_grating(pump_mode, signal_um, (lo, hi), n_points)).map_err(to_py)?;
        spectrum_dict(py, &s)
    }

    /// Rows of `(delta_period_nm, crossing_nm, shift_nm, pump_retune_nm)`; lost crossings are None.
    #[pyo3(signature = (pump_mode, grating_k, deltas_nm, lo_nm = 1250.0, hi_nm = 1450.0, n_points = 201))]
    #[allow(clippy::type_complexity)]
    fn grating_tolerance(
        &self,
        py: Python<'_>,
        pump_mode: usize,
        grating_k: f64,
        deltas_nm: Vec<f64>,
        lo_nm: f64,
        hi_nm: f64,
        n_points: usize,
    ) -> PyResult<Vec<(f64, Option<f64>, Option<f64>, Option<f64>)>> {
        let rows = py
            .detach(|| self.inner.grating_tolerance(pump_mode, grating_k, &deltas_nm, (lo_nm, hi_nm), n_points))
            .map_err(to_py)?;
        Ok(rows.iter().map(|r| (r.delta_period_nm, r.crossing_nm, r.shift_nm, r.pump_retune_nm)).collect())
    }

    /// Output state at one signal wavelength, in the supermode basis, plus its metrics.
    #[pyo3(signature = (pump_mode, signal_nm, grating_k = None, threshold = spdc::DEFAULT_DIMENSION_THRESHOLD))]
    fn state<'py>(
        &self,
        py: Python<'py>,
        pump_mode: usize,
        signal_nm: f64,
        grating_k: Option<f64>,
        threshold: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let state = py
            .detach(|| -> tricoupler::Result<BiphotonState> {
                let k = match grating_k {
                    Some(k) => k,
                    None => self.inner.design_grating(pump_mode, design::DEFAULT_SPREAD_LIMIT)?.grating_k,
                };
                let table = self.inner.table(signal_nm * 1e-3)?;
                spdc::assemble_state(pump_mode, &table, k, self.inner.length_mm)
            })
            .map_err(to_py)?;
        let d = metrics_dict(py, &state, threshold)?;
        let terms: Vec<(usize, usize, Complex64)> =
            state.terms.iter().map(|t| (t.spec.signal_mode, t.spec.idler_mode, t.amplitude)).collect();
        d.set_item("terms", terms)?;
        d.set_item("csv", spdc::state_csv(&state))?;
        d.set_item("ports_csv", spdc::state_csv(&spdc::port_mapping(&state)))?;
        Ok(d)
    }
}

/// Grating period (um) for a grating frequency (um^-1).
#[pyfunction]
fn period_um(grating_k: f64) -> f64 {
    2.0 * PI / grating_k
}

#[pymodule]
fn tricoupler_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Adds every class, function and exception to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMaterial>()?;
    m.add_class::<PyGeometry>()?;
    m.add_class::<PyMode>()?;
    m.add_class::<PyDesigner>()?;
    m.add_function(wrap_pyfunction!(solve_modes, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_processes, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate, m)?)?;
    m.add_function(wrap_pyfunction!(period_um, m)?)?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add("DesignError", m.py().get_type::<DesignError>())?;
    Ok(())
}
