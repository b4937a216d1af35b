use super::{MaterialModel, Polarization};
use crate::error::{Error, Result};
use std::cell::Cell;
use crate::modesolver::{
    solve_channel_modes, solve_coupler_y, CouplerGeometry, PUMP_MODES, SIGNAL_IDLER_MODES,
};

/// Tuning knobs for [`calibrate_contrast_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOptions {
    /// Weight of `(max K - min K)^2` relative to the squared mismatch of the mean.
    pub spread_weight: f64,
    /// Starting `(delta_n_h, delta_n_v)`.
    pub initial: (f64, f64),
    /// Common bounds for both contrasts.
    pub bounds: (f64, f64),
    /// Signal wavelengths (um) over which the coupler must stay three-moded;
    /// the conjugate idler band is checked as well.
    pub signal_window_um: (f64, f64),
    /// Accepted `|mean K - target|`, um^-1.
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            spread_weight: 1.0,
            initial: (0.0014, 0.0024),
            bounds: (1e-4, 0.0999),
            signal_window_um: (1.25, 1.45),
            tolerance: 1e-4,
            max_evaluations: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub delta_n_h: f64,
    pub delta_n_v: f64,
    /// Case-A grating frequencies at degeneracy, `j = 1..3`.
    pub k_values: [f64; 3],
    pub mean_k: f64,
    /// `|mean K - target|`.
    pub residual: f64,
    pub evaluations: usize,
}

impl Calibration {
    pub fn spread(&self) -> f64 {
        let max = self.k_values.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.k_values.iter().cloned().fold(f64::MAX, f64::min);
        max - min
    }

    pub fn apply(&self, material: &MaterialModel) -> MaterialModel {
        material.with_contrast(self.delta_n_h, self.delta_n_v)
    }
}

/// `K_0j = beta_p^(0) - beta_s^(j) - beta_i^(j)` at `lambda_s = lambda_i = 2 lambda_p`, `j = 0, 1, 2`.
pub fn degenerate_k_values(material: &MaterialModel, geometry: &CouplerGeometry, pump_um: f64) -> Result<[f64; 3]> {
    let ls = 2.0 * pump_um;
    let pump = solve_channel_modes(material, geometry, pump_um, Polarization::H, PUMP_MODES)?;
    let sig = solve_channel_modes(material, geometry, ls, Polarization::H, SIGNAL_IDLER_MODES)?;
    let idl = solve_channel_modes(material, geometry, ls, Polarization::V, SIGNAL_IDLER_MODES)?;
    Ok([0, 1, 2].map(|j| pump[0].beta - sig[j].beta - idl[j].beta))
}

/// Mean of the three case-A grating frequencies at degeneracy, um^-1.
pub fn mean_degenerate_k(material: &MaterialModel, geometry: &CouplerGeometry, pump_um: f64) -> Result<f64> {
    Ok(degenerate_k_values(material, geometry, pump_um)?.iter().sum::<f64>() / 3.0)
}

/// Fixes `(delta_n_h, delta_n_v)` so that the mean degenerate K equals `target_k`.
pub fn calibrate_contrast(
    material: &MaterialModel,
    geometry: &CouplerGeometry,
    target_k: f64,
    pump_um: f64,
) -> Result<Calibration> {
    calibrate_contrast_with(material, geometry, target_k, pump_um, &CalibrationOptions::default())
}

/// Bounded Nelder-Mead on `(mean K - target)^2 + w (max K - min K)^2`, followed
/// by a one-dimensional polish of `delta_n_h` that closes the mean exactly.
/// Contrasts that break the three-mode condition anywhere in the working band
/// are rejected.
pub fn calibrate_contrast_with(
    material: &MaterialModel,
    geometry: &CouplerGeometry,
    target_k: f64,
    pump_um: f64,
    opts: &CalibrationOptions,
) -> Result<Calibration> {
    if !(target_k > 0.0 && target_k.is_finite()) {
        return Err(Error::InvalidInput(format!("target K must be positive, got {target_k}")));
    }
    let (lo, hi) = opts.bounds;
    let (ws_lo, ws_hi) = opts.signal_window_um;
    let conj = |ls: f64| 1.0 / (1.0 / pump_um - 1.0 / ls);
    let band = (ws_lo.min(conj(ws_hi)), ws_hi.max(conj(ws_lo)));
    let evaluations = Cell::new(0usize);

    let eval = |h: f64, v: f64| -> Option<[f64; 3]> {
        evaluations.set(evaluations.get() + 1);
        if !(lo..=hi).contains(&h) || !(lo..=hi).contains(&v) {
            return None;
        }
        let m = material.with_contrast(h, v);
        // Mode count only grows towards short wavelengths.
        for pol in Polarization::ALL {
            for l in [band.0, band.1] {
                solve_coupler_y(&m, geometry, l, pol).ok()?;
            }
        }
        degenerate_k_values(&m, geometry, pump_um).ok()
    };
    let mean = |k: &[f64; 3]| k.iter().sum::<f64>() / 3.0;
    let spread = |k: &[f64; 3]| {
        k.iter().cloned().fold(f64::MIN, f64::max) - k.iter().cloned().fold(f64::MAX, f64::min)
    };
    const INFEASIBLE: f64 = 1e6;

    // Closest feasible mean seen so far, reported if calibration fails.
    let best: Cell<Option<(f64, f64, f64)>> = Cell::new(None);
    let objective = |p: [f64; 2]| -> f64 {
        let Some(k) = eval(p[0], p[1]) else {
            return INFEASIBLE;
        };
        let r = (mean(&k) - target_k).abs();
        if best.get().is_none_or(|b| r < b.2) {
            best.set(Some((p[0], p[1], r)));
        }
        (mean(&k) - target_k).powi(2) + opts.spread_weight * spread(&k).powi(2)
    };

    let (h0, v0) = opts.initial;
    let f0 = objective([h0, v0]);
    let (h, v) = if f0 == 0.0 {
        (h0, v0)
    } else {
        let p = nelder_mead(objective, [h0, v0], [0.1 * h0.max(1e-4), 0.1 * v0.max(1e-4)], opts.max_evaluations, 1e-12);
        (p[0], p[1])
    };
    let fail = || {
        let (bh, bv, r) = best.get().unwrap_or((h0, v0, f64::INFINITY));
        Error::Calibration { residual: r, delta_n_h: bh, delta_n_v: bv }
    };
    let Some(k) = eval(h, v) else {
        return Err(fail());
    };

    // Polish: at fixed delta_n_v the mean K is monotone in delta_n_h.
    let r0 = mean(&k) - target_k;
    let mut result = (h, k);
    if r0 != 0.0 {
        let mismatch = |h: f64| eval(h, v).map(|k| (mean(&k) - target_k, k));
        let mut step = 1e-3 * h;
        let mut other = None;
        'search: for _ in 0..40 {
            for cand in [h + step, h - step] {
                if let Some((r, _)) = mismatch(cand) {
                    if r.signum() != r0.signum() {
                        other = Some(cand);
                        break 'search;
                    }
                }
            }
            step *= 2.0;
        }
        if let Some(b) = other {
            let (mut a, mut b) = (h, b);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid == a || mid == b {
                    break;
                }
                match mismatch(mid) {
                    Some((r, _)) if r.signum() == r0.signum() => a = mid,
                    Some(_) => b = mid,
                    None => break,
                }
            }
            for x in [a, b] {
                if let Some((r, k)) = mismatch(x) {
                    if r.abs() < (mean(&result.1) - target_k).abs() {
                        result = (x, k);
                    }
                }
            }
        }
    }
    let (fh, fk) = result;
    let mean_k = mean(&fk);
    let residual = (mean_k - target_k).abs();
    if residual > opts.tolerance {
        return Err(fail());
    }
    Ok(Calibration { delta_n_h: fh, delta_n_v: v, k_values: fk, mean_k, residual, evaluations: evaluations.get() })
}

fn nelder_mead<F: FnMut([f64; 2]) -> f64>(
    mut f: F,
    x0: [f64; 2],
    step: [f64; 2],
    max_evals: usize,
    ftol: f64,
) -> [f64; 2] {
    let mut pts = [x0, [x0[0] + step[0], x0[1]], [x0[0], x0[1] + step[1]]];
    let mut vals = pts.map(&mut f);
    let mut evals = 3;
    let lin = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    while evals < max_evals {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = idx.map(|i| pts[i]);
        vals = idx.map(|i| vals[i]);
        if (vals[2] - vals[0]).abs() <= ftol * (vals[0].abs() + ftol) && vals[0] < 1e5 {
            let size = (pts[2][0] - pts[0][0]).abs().max((pts[2][1] - pts[0][1]).abs());
            if size < 1e-9 {
                break;
            }
        }
        let c = lin(pts[0], pts[1], 0.5);
        let r = lin(c, pts[2], -1.0);
        let fr = f(r);
        evals += 1;
        if fr < vals[0] {
            let e = lin(c, pts[2], -2.0);
            let fe = f(e);
            evals += 1;
            if fe < fr {
                pts[2] = e;
                vals[2] = fe;
            } else {
                pts[2] = r;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            pts[2] = r;
            vals[2] = fr;
        } else {
            let (k, fk) = if fr < vals[2] {
                let k = lin(c, r, 0.5);
                (k, f(k))
            } else {
                let k = lin(c, pts[2], 0.5);
                (k, f(k))
            };
            evals += 1;
            if fk < vals[2].min(fr) {
                pts[2] = k;
                vals[2] = fk;
            } else {
                for i in 1..3 {
                    pts[i] = lin(pts[0], pts[i], 0.5);
                    vals[i] = f(pts[i]);
                }
                evals += 2;
            }
        }
    }
    let i = (0..3).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    pts[i]
}
