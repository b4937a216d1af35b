use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "tricoupler_py").unwrap();
        tricoupler_py::register(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("tc", m).unwrap();
        f(py, &globals);
    });
}

fn run(py: Python<'_>, globals: &Bound<'_, PyDict>, code: &str) {
    let code = std::ffi::CString::new(code).unwrap();
    py.run(&code, Some(globals), None).unwrap_or_else(|e| panic!("{e}"));
}

#[test]
fn modes_round_trip_through_python() {
    with_module(|py, g| {
        run(
            py,
            g,
            "modes = tc.solve_modes(tc.Material(), tc.Geometry(), 1.35, 'V')\n\
             assert [m.m for m in modes] == [0, 1, 2]\n\
             assert all(m.polarization == 'V' for m in modes)\n\
             assert modes[0].n_eff > modes[2].n_eff",
        );
    });
}

#[test]
fn errors_map_to_python_exceptions() {
    with_module(|py, g| {
        run(
            py,
            g,
            "try:\n    tc.Geometry(width_a=-1.0)\nexcept ValueError:\n    pass\nelse:\n    raise AssertionError\n\
             try:\n    tc.solve_modes(tc.Material(), tc.Geometry(width_a=20.0), 1.35, 'H')\n\
             except tc.SolverError:\n    pass\nelse:\n    raise AssertionError\n\
             try:\n    tc.solve_modes(tc.Material(), tc.Geometry(), 1.35, 'X')\nexcept ValueError:\n    pass\n\
             else:\n    raise AssertionError",
        );
    });
}

#[test]
fn metrics_of_uniform_state() {
    with_module(|py, g| {
        run(
            py,
            g,
            "import math\n\
             m = tc.entanglement_metrics([1, 1, 1])\n\
             assert abs(m['fidelity_to_uniform'] - 1) < 1e-12\n\
             assert abs(m['schmidt_entropy'] - math.log2(3)) < 1e-12\n\
             assert m['dimensionality'] == 3\n\
             assert tc.entanglement_metrics([2j])['schmidt_entropy'] == 0.0",
        );
    });
}

#[test]
fn designer_grating_and_state() {
    with_module(|py, g| {
        run(
            py,
            g,
            "d = tc.Designer(tc.Material(), tc.Geometry())\n\
             k = d.design_grating(0)['grating_k']\n\
             assert abs(k - 0.9074) < 1e-3\n\
             s = d.state(0, 1350.0, k)\n\
             assert len(s['terms']) == 3\n\
             assert abs(sum(abs(a) ** 2 for _, _, a in s['terms']) - 1) < 1e-12\n\
             assert s['ports_csv'].count('\\n') >= 4",
        );
    });
}
