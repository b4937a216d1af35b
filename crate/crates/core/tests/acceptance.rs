//! Acceptance gate: one PASS/FAIL line per criterion, then a single verdict.

mod common;

use common::{design_table, designer, PUMP_UM};
use num_complex::Complex64;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;
use tricoupler::design::{
    compare_case_bandwidths, find_intersection, fwhm, Designer, EfficiencySpectrum, DEFAULT_SIGNAL_RANGE_NM,
};
use tricoupler::material::{calibrate_contrast, degenerate_k_values};
use tricoupler::modesolver::{closed_form_roots, transfer_matrix_oracle, Wave, PUMP_MODES, SIGNAL_IDLER_MODES};
use tricoupler::spdc::{
    assemble_state, coefficient, entanglement_metrics, enumerate_processes, idler_wavelength, overlap_integral,
    phase_mismatch, qpm_frequency, BiphotonState, Case, ProcessSpec, Role,
};
use tricoupler::{CouplerGeometry, MaterialModel, Polarization};

type Outcome = Result<String, String>;

struct Gate {
    failed: Vec<String>,
}

impl Gate {
    // Written to the real stdout so the lines survive libtest's capture.
    fn report(&mut self, id: &str, title: &str, outcome: Outcome) {
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d.clone()),
            Err(d) => ("FAIL", d.clone()),
        };
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{tag} [{id}] {title}: {detail}");
        let _ = out.flush();
        if outcome.is_err() {
            self.failed.push(id.to_string());
        }
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    format!("error: {x}")
}

fn wave(pol: Polarization) -> Wave {
    match pol {
        Polarization::H => Wave::Tm,
        Polarization::V => Wave::Te,
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let m = MaterialModel::default();
    let mut runner = TestRunner::deterministic();
    let strat = (3.0f64..8.0, 3.0f64..10.0);
    let mut worst: f64 = 0.0;
    let mut problems = Vec::new();
    for _ in 0..20 {
        let (a, d) = strat.new_tree(&mut runner).map_err(e)?.current();
        let g = CouplerGeometry { width_a: a, gap_d: d, ..Default::default() };
        for pol in [Polarization::H, Polarization::V] {
            let closed = closed_form_roots(&m, &g, 1.35, pol).map_err(e)?;
            let stack = g.y_stack(m.core_index(1.35, pol).map_err(e)?, m.substrate_index(1.35, pol).map_err(e)?);
            let oracle = transfer_matrix_oracle(&stack, 1.35, wave(pol)).map_err(e)?;
            if closed.len() != oracle.len() {
                problems.push(format!("a={a:.3} d={d:.3} {pol}: {} vs {} roots", closed.len(), oracle.len()));
                continue;
            }
            for (c, o) in closed.iter().zip(&oracle) {
                worst = worst.max((c.0 - o).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        problems.is_empty() && worst < 1e-9 && secs < 30.0,
        format!("40 solves, max |dn_eff| = {worst:.2e} (< 1e-9), {secs:.2} s (< 30 s){}", problems.join("; ")),
    )
}

fn criterion_2() -> Outcome {
    let t = design_table();
    let (mut max_forbidden, mut min_allowed) = (0.0f64, f64::INFINITY);
    for pump in 0..2 {
        let allowed: Vec<_> = enumerate_processes(pump).map_err(e)?.iter().map(|p| (p.signal_mode, p.idler_mode)).collect();
        for s in 0..3 {
            for i in 0..3 {
                let spec = ProcessSpec { case: Case::A, pump_mode: pump, signal_mode: s, idler_mode: i, role: Role::State(1) };
                let o = overlap_integral(&spec, t).map_err(e)?.abs();
                if allowed.contains(&(s, i)) {
                    min_allowed = min_allowed.min(o);
                } else {
                    max_forbidden = max_forbidden.max(o);
                }
            }
        }
    }
    check(
        max_forbidden < 1e-12 && min_allowed > 1e-4,
        format!("max forbidden |I| = {max_forbidden:.2e} (< 1e-12), min allowed |I| = {min_allowed:.3e} (> 1e-4)"),
    )
}

fn criterion_3() -> Outcome {
    let g = CouplerGeometry::default();
    let cal = calibrate_contrast(&MaterialModel::default(), &g, 0.9074, PUMP_UM).map_err(e)?;
    let ks = degenerate_k_values(&cal.apply(&MaterialModel::default()), &g, PUMP_UM).map_err(e)?;
    let mean = ks.iter().sum::<f64>() / 3.0;
    let period = 2.0 * PI / mean;
    check(
        (mean - 0.9074).abs() <= 1e-4 && (period - 6.92).abs() <= 0.01,
        format!(
            "dn = ({:.6e}, {:.6e}), mean K = {mean:.6} um^-1 (0.9074 +- 1e-4), period = {period:.4} um (6.92 +- 0.01)",
            cal.delta_n_h, cal.delta_n_v
        ),
    )
}

fn criterion_4(d: &Designer) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for pump in 0..2 {
        let g = d.design_grating(pump, 0.02).map_err(e)?;
        let rel = g.relative_spread();
        ok &= rel < 0.02;
        parts.push(format!("case {} spread {:.3}% of {:.5}", if pump == 0 { "A" } else { "B" }, 100.0 * rel, g.grating_k));
    }
    check(ok, format!("{} (< 2%)", parts.join(", ")))
}

struct Sweeps {
    grating_k: f64,
    a: EfficiencySpectrum,
    b: EfficiencySpectrum,
    seconds_a: f64,
}

fn sweeps(d: &Designer) -> Result<Sweeps, String> {
    let grating_k = d.design_grating(0, 0.02).map_err(e)?.grating_k;
    let start = Instant::now();
    let a = d.sweep_signal_wavelength(0, grating_k, DEFAULT_SIGNAL_RANGE_NM, 201).map_err(e)?;
    let seconds_a = start.elapsed().as_secs_f64();
    let b = d.sweep_signal_wavelength(1, grating_k, DEFAULT_SIGNAL_RANGE_NM, 201).map_err(e)?;
    Ok(Sweeps { grating_k, a, b, seconds_a })
}

fn criterion_5(s: &Sweeps) -> Outcome {
    let ca = find_intersection(&s.a).map_err(e)?;
    let cb = find_intersection(&s.b).map_err(e)?;
    let ok = |c: &tricoupler::design::Crossing| (c.location - 1350.0).abs() <= 2.0 && c.spread < 0.02;
    check(
        ok(&ca) && ok(&cb) && s.seconds_a < 60.0,
        format!(
            "A at {:.2} nm spread {:.1}%, B at {:.2} nm spread {:.1}% (1350 +- 2 nm, < 2%), 201-point sweep {:.2} s (< 60 s)",
            ca.location,
            100.0 * ca.spread,
            cb.location,
            100.0 * cb.spread,
            s.seconds_a
        ),
    )
}

fn criterion_6(d: &Designer, grating_k: f64) -> Outcome {
    let rows = d.grating_tolerance(0, grating_k, &[-50.0, 50.0], DEFAULT_SIGNAL_RANGE_NM, 201).map_err(e)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for r in &rows {
        let shift = r.shift_nm.ok_or_else(|| format!("crossing lost at {} nm", r.delta_period_nm))?;
        let retune = r.pump_retune_nm.unwrap_or(f64::NAN);
        let magnitude = (2.0..=10.0).contains(&shift.abs());
        let sign = shift.signum() == r.delta_period_nm.signum();
        ok &= magnitude && sign && retune == -shift / 2.0;
        parts.push(format!("dL {:+} nm -> shift {shift:+.2} nm, retune {retune:+.2} nm", r.delta_period_nm));
    }
    for period in [6.874, 6.974] {
        let spec = d.sweep_signal_wavelength(0, 2.0 * PI / period, DEFAULT_SIGNAL_RANGE_NM, 201).map_err(e)?;
        match find_intersection(&spec) {
            Ok(c) => parts.push(format!("crossing at {:.2} nm for {period} um", c.location)),
            Err(_) => {
                ok = false;
                parts.push(format!("no crossing for {period} um"));
            }
        }
    }
    check(ok, format!("{} (|shift| in [2, 10] nm, sign of dL, retune -shift/2)", parts.join(", ")))
}

fn criterion_7(s: &Sweeps) -> Outcome {
    let r = compare_case_bandwidths(&s.a, &s.b);
    let fmt = |w: &[Option<f64>]| {
        w.iter().map(|x| x.map_or("undefined".to_string(), |v| format!("{v:.2}"))).collect::<Vec<_>>().join("/")
    };
    let detail = format!(
        "FWHM A = {} nm, B = {} nm, min B / max A = {}",
        fmt(&r.widths_a),
        fmt(&r.widths_b),
        r.ratio.map_or("undefined".into(), |x| format!("{x:.4}"))
    );
    check(r.b_broader() == Some(true), format!("{detail} (> 1)"))
}

fn criterion_8(d: &Designer, s: &Sweeps) -> Outcome {
    let at = find_intersection(&s.a).map_err(e)?.location;
    let table = d.table(at * 1e-3).map_err(e)?;
    let state = assemble_state(0, &table, s.grating_k, d.length_mm).map_err(e)?;
    let m = entanglement_metrics(&state, 0.01).map_err(e)?;
    let spec = enumerate_processes(0).map_err(e)?[0];
    let single = BiphotonState::new(Case::A, vec![(spec, Complex64::new(0.4, 0.2))]).map_err(e)?;
    let h1 = entanglement_metrics(&single, 0.01).map_err(e)?.schmidt_entropy;
    let target = 3f64.log2();
    check(
        m.fidelity_to_uniform > 0.99 && (m.schmidt_entropy - target).abs() <= 0.05 && h1 == 0.0,
        format!(
            "at {at:.2} nm fidelity {:.4} (> 0.99), entropy {:.4} bits (log2 3 +- 0.05), single-term entropy {h1} (0); phase-free fidelity {:.4}",
            m.fidelity_to_uniform, m.schmidt_entropy, m.max_local_fidelity
        ),
    )
}

fn criterion_9(d: &Designer, s: &Sweeps) -> Outcome {
    let t = design_table();
    let mut parts = Vec::new();
    let mut ok = true;

    let p = enumerate_processes(0).map_err(e)?[1];
    let k = qpm_frequency(&p, t).map_err(e)?;
    let mut products = Vec::new();
    for l_mm in [1.0, 2.55, 5.0] {
        let span = 12.0 / (l_mm * 1e3);
        let dk: Vec<f64> = (0..4001).map(|i| -span + 2.0 * span * i as f64 / 4000.0).collect();
        let eff = dk
            .iter()
            .map(|x| coefficient(&p, t, k - x, l_mm, 1.0).map(|r| r.raw_efficiency()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(e)?;
        products.push(fwhm(&dk, &eff).ok_or("sinc width undefined")? * l_mm);
    }
    let dev = products.iter().map(|w| (w / products[0] - 1.0).abs()).fold(0.0, f64::max);
    ok &= dev < 0.01;
    parts.push(format!("FWHM*L spread {:.2e} (< 1%)", dev));

    let mut worst_norm: f64 = 0.0;
    for pump in 0..2 {
        let st = assemble_state(pump, t, s.grating_k, 2.55).map_err(e)?;
        worst_norm = worst_norm.max((st.norm_sqr() - 1.0).abs());
    }
    ok &= worst_norm <= 1e-12;
    parts.push(format!("|sum p - 1| = {worst_norm:.1e} (<= 1e-12)"));

    let mut worst_res: f64 = 0.0;
    let mut solved = 0;
    let mut take = |modes: &[tricoupler::ChannelMode]| {
        for m in modes {
            worst_res = worst_res.max(m.y_mode.residual).max(m.z_mode.residual);
            solved += 1;
        }
    };
    take(&d.modes(PUMP_UM, Polarization::H, PUMP_MODES).map_err(e)?);
    for &nm in &s.a.grid {
        let ls = nm * 1e-3;
        take(&d.modes(ls, Polarization::H, SIGNAL_IDLER_MODES).map_err(e)?);
        take(&d.modes(idler_wavelength(PUMP_UM, ls).map_err(e)?, Polarization::V, SIGNAL_IDLER_MODES).map_err(e)?);
    }
    ok &= worst_res < 1e-10;
    parts.push(format!("max residual {worst_res:.1e} over {solved} modes (< 1e-10)"));

    let again = designer().sweep_signal_wavelength(0, s.grating_k, DEFAULT_SIGNAL_RANGE_NM, 201).map_err(e)?;
    let same = again.to_csv().into_bytes() == s.a.to_csv().into_bytes();
    ok &= same;
    parts.push(format!("rerun CSV byte-identical: {same}"));
    check(ok, parts.join(", "))
}

// Numeric claims attached to individual operations rather than the numbered criteria.
fn example_rounded_period_mismatch() -> Outcome {
    let t = design_table();
    let k = 2.0 * PI / 6.92;
    let dks = enumerate_processes(0)
        .map_err(e)?
        .iter()
        .filter(|p| p.in_state())
        .map(|p| phase_mismatch(p, t, k))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?;
    let worst = dks.iter().map(|x| x.abs()).fold(0.0, f64::max);
    check(worst < 1e-3, format!("case-A |dk| at 2 pi / 6.92 um: {:?}, max {worst:.2e} (< 1e-3)", dks.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>()))
}

fn example_overlap_ratio() -> Outcome {
    let t = design_table();
    let o = enumerate_processes(0)
        .map_err(e)?
        .iter()
        .filter(|p| p.in_state())
        .map(|p| overlap_integral(p, t).map(f64::abs))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?;
    let ratio = o.iter().cloned().fold(0.0, f64::max) / o.iter().cloned().fold(f64::INFINITY, f64::min);
    check(ratio < 1.2, format!("case-A overlaps {o:.4?}, max/min {ratio:.3} (< 1.2)"))
}

fn example_case_b_grating_crossing(d: &Designer, grating_k: f64) -> Outcome {
    let spec = d.sweep_grating(1, 2.0 * PUMP_UM, (0.89, 0.92), 301).map_err(e)?;
    let c = find_intersection(&spec).map_err(e)?;
    check(
        c.spread < 0.02 && (c.location - grating_k).abs() / grating_k < 0.02,
        format!("case-B grating crossing at {:.5} um^-1 spread {:.1}% (< 2%)", c.location, 100.0 * c.spread),
    )
}

#[test]
fn acceptance() {
    let mut gate = Gate { failed: Vec::new() };
    // Start below the harness's "test acceptance ..." prefix.
    let _ = writeln!(std::io::stdout().lock());
    let d = designer();
    gate.report("1", "oracle equivalence", criterion_1());
    gate.report("2", "parity selection", criterion_2());
    gate.report("3", "calibration closure", criterion_3());
    gate.report("4", "single-grating feasibility", criterion_4(&d));
    match sweeps(&d) {
        Ok(s) => {
            gate.report("5", "crossing reproduction", criterion_5(&s));
            gate.report("6", "grating tolerance", criterion_6(&d, s.grating_k));
            gate.report("7", "case-B bandwidth", criterion_7(&s));
            gate.report("8", "state metrics", criterion_8(&d, &s));
            gate.report("9", "numerical hygiene", criterion_9(&d, &s));
            gate.report("ex-a", "mismatch at the rounded period", example_rounded_period_mismatch());
            gate.report("ex-b", "overlap balance", example_overlap_ratio());
            gate.report("ex-c", "case-B grating-sweep crossing", example_case_b_grating_crossing(&d, s.grating_k));
        }
        Err(err) => {
            for id in ["5", "6", "7", "8", "9"] {
                gate.report(id, "sweep", Err(err.clone()));
            }
        }
    }
    assert!(gate.failed.is_empty(), "failed: {}", gate.failed.join(", "));
}
