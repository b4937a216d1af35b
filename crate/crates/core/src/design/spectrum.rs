use crate::error::{Error, Result};
use crate::format::sig17;
use crate::spdc::ProcessSpec;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Signal wavelength, nm.
    SignalWavelength,
    /// Grating frequency, um^-1.
    GratingFrequency,
}

/// Relative efficiencies of several processes on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencySpectrum {
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub processes: Vec<ProcessSpec>,
    /// `per_process[k][i]`, normalised so the largest value over all processes is 1.
    pub per_process: Vec<Vec<f64>>,
    /// Phase mismatch of each process at each grid point, rad/um.
    pub delta_k: Vec<Vec<f64>>,
}

impl EfficiencySpectrum {
    /// `rows[i][k] = (|F|^2, Δk)` for grid point `i` and process `k`.
    pub fn from_rows(axis: Axis, grid: Vec<f64>, processes: Vec<ProcessSpec>, rows: Vec<Vec<(f64, f64)>>) -> Self {
        let max = rows.iter().flatten().map(|r| r.0).fold(0.0, f64::max);
        let n = processes.len();
        let per_process = (0..n)
            .map(|k| rows.iter().map(|r| if max > 0.0 { r[k].0 / max } else { 0.0 }).collect())
            .collect();
        let delta_k = (0..n).map(|k| rows.iter().map(|r| r[k].1).collect()).collect();
        Self { axis, grid, processes, per_process, delta_k }
    }

    /// Spectrum of arbitrary curves, normalised to the overall maximum.
    pub fn from_curves(axis: Axis, grid: Vec<f64>, processes: Vec<ProcessSpec>, curves: Vec<Vec<f64>>) -> Self {
        let rows = (0..grid.len()).map(|i| curves.iter().map(|c| (c[i], f64::NAN)).collect()).collect();
        Self::from_rows(axis, grid, processes, rows)
    }

    /// `axis_value,process_1,...,process_n` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("axis_value");
        for k in 1..=self.processes.len() {
            let _ = write!(s, ",process_{k}");
        }
        s.push('\n');
        for (i, x) in self.grid.iter().enumerate() {
            s.push_str(&sig17(*x));
            for c in &self.per_process {
                s.push(',');
                s.push_str(&sig17(c[i]));
            }
            s.push('\n');
        }
        s
    }

    /// Full width at half of each curve's own maximum, in axis units.
    pub fn widths(&self) -> Vec<Option<f64>> {
        self.per_process.iter().map(|c| fwhm(&self.grid, c)).collect()
    }
}

/// Point of least relative spread `(max - min) / max` among the curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub location: f64,
    pub spread: f64,
    pub efficiencies: Vec<f64>,
    /// All curves coincide everywhere.
    pub degenerate: bool,
}

/// Only points where the strongest curve reaches this fraction of the overall
/// maximum compete, so that vanishing tails cannot pose as crossings.
pub const CROSSING_FLOOR: f64 = 0.1;

pub fn find_intersection(spectrum: &EfficiencySpectrum) -> Result<Crossing> {
    find_intersection_with(spectrum, CROSSING_FLOOR)
}

/// Minimises the relative spread over grid points and over the pairwise
/// crossings of the linearly interpolated curves. On the interpolant the
/// minimum always falls on one of these points.
pub fn find_intersection_with(spectrum: &EfficiencySpectrum, floor: f64) -> Result<Crossing> {
    let curves = &spectrum.per_process;
    let x = &spectrum.grid;
    if curves.len() < 2 {
        return Err(Error::InvalidInput("a crossing needs at least two curves".into()));
    }
    let global = curves.iter().flatten().cloned().fold(0.0, f64::max);
    if !(global > 0.0) {
        return Err(Error::NoCrossing);
    }
    let spread = |v: &[f64]| {
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        if max > 0.0 {
            (max - min) / max
        } else {
            1.0
        }
    };
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    let mut consider = |loc: f64, v: Vec<f64>| {
        if v.iter().cloned().fold(f64::MIN, f64::max) < floor * global {
            return;
        }
        let s = spread(&v);
        if best.as_ref().is_none_or(|b| s < b.1) {
            best = Some((loc, s, v));
        }
    };
    let mut degenerate = true;
    for i in 0..x.len() {
        let v: Vec<f64> = curves.iter().map(|c| c[i]).collect();
        degenerate &= v.iter().all(|&e| e == v[0]);
        consider(x[i], v);
        if i + 1 == x.len() {
            continue;
        }
        for a in 0..curves.len() {
            for b in a + 1..curves.len() {
                let d0 = curves[a][i] - curves[b][i];
                let d1 = curves[a][i + 1] - curves[b][i + 1];
                if d0 == 0.0 || d1 == 0.0 || d0.signum() == d1.signum() {
                    continue;
                }
                let t = d0 / (d0 - d1);
                let v = curves.iter().map(|c| c[i] + t * (c[i + 1] - c[i])).collect();
                consider(x[i] + t * (x[i + 1] - x[i]), v);
            }
        }
    }
    match best {
        Some((location, s, efficiencies)) if s < 1.0 => {
            Ok(Crossing { location, spread: s, efficiencies, degenerate })
        }
        _ => Err(Error::NoCrossing),
    }
}

/// Full width at half maximum of a sampled curve; `None` if it does not drop
/// below half on both sides inside the grid.
pub fn fwhm(grid: &[f64], curve: &[f64]) -> Option<f64> {
    let (peak, &top) = curve.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))?;
    if !(top > 0.0) {
        return None;
    }
    let half = 0.5 * top;
    let cross = |i: usize, j: usize| grid[i] + (half - curve[i]) / (curve[j] - curve[i]) * (grid[j] - grid[i]);
    let left = (0..peak).rev().find(|&i| curve[i] < half).map(|i| cross(i, i + 1))?;
    let right = (peak + 1..curve.len()).find(|&i| curve[i] < half).map(|i| cross(i - 1, i))?;
    Some(right - left)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthReport {
    pub widths_a: Vec<Option<f64>>,
    pub widths_b: Vec<Option<f64>>,
    /// Narrowest case-B width over widest case-A width, when all are defined.
    pub ratio: Option<f64>,
}

impl BandwidthReport {
    pub fn b_broader(&self) -> Option<bool> {
        self.ratio.map(|r| r > 1.0)
    }
}

pub fn compare_case_bandwidths(a: &EfficiencySpectrum, b: &EfficiencySpectrum) -> BandwidthReport {
    let widths_a = a.widths();
    let widths_b = b.widths();
    let all = |w: &[Option<f64>]| w.iter().copied().collect::<Option<Vec<f64>>>();
    let ratio = match (all(&widths_a), all(&widths_b)) {
        (Some(wa), Some(wb)) if !wa.is_empty() && !wb.is_empty() => {
            let max_a = wa.iter().cloned().fold(f64::MIN, f64::max);
            let min_b = wb.iter().cloned().fold(f64::MAX, f64::min);
            Some(min_b / max_a)
        }
        _ => None,
    };
    BandwidthReport { widths_a, widths_b, ratio }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spdc::enumerate_processes;

    fn specs(n: usize) -> Vec<ProcessSpec> {
        enumerate_processes(1).unwrap().into_iter().take(n).collect()
    }

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn offset_parabolas() {
        // 1 - (x - 0.4)^2 and 1 - (x - 0.7)^2 cross at x = 0.55.
        let x = grid(0.0, 1.0, 101);
        let c1 = x.iter().map(|x| 1.0 - (x - 0.4).powi(2)).collect();
        let c2 = x.iter().map(|x| 1.0 - (x - 0.7).powi(2)).collect();
        let s = EfficiencySpectrum::from_curves(Axis::GratingFrequency, x, specs(2), vec![c1, c2]);
        let c = find_intersection(&s).unwrap();
        assert!((c.location - 0.55).abs() < 1e-3);
        assert!(c.spread < 1e-12);
        assert!(!c.degenerate);
    }

    #[test]
    fn identical_curves_are_degenerate() {
        let x = grid(0.0, 1.0, 11);
        let c: Vec<f64> = x.iter().map(|x| (-(x - 0.5f64).powi(2)).exp()).collect();
        let s = EfficiencySpectrum::from_curves(Axis::GratingFrequency, x, specs(3), vec![c.clone(), c.clone(), c]);
        let cr = find_intersection(&s).unwrap();
        assert!(cr.degenerate);
        assert_eq!(cr.spread, 0.0);
    }

    #[test]
    fn disjoint_curves_do_not_cross() {
        let x = grid(0.0, 1.0, 11);
        let c1 = (0..11).map(|i| if i < 5 { 1.0 } else { 0.0 }).collect();
        let c2 = (0..11).map(|i| if i > 5 { 1.0 } else { 0.0 }).collect();
        let s = EfficiencySpectrum::from_curves(Axis::GratingFrequency, x, specs(2), vec![c1, c2]);
        assert!(matches!(find_intersection(&s), Err(Error::NoCrossing)));
    }

    #[test]
    fn fwhm_of_triangle_and_open_curve() {
        let x = grid(-2.0, 2.0, 401);
        let tri: Vec<f64> = x.iter().map(|x| (1.0 - x.abs()).max(0.0)).collect();
        assert!((fwhm(&x, &tri).unwrap() - 1.0).abs() < 1e-12);
        let ramp: Vec<f64> = x.iter().map(|x| x + 2.0).collect();
        assert_eq!(fwhm(&x, &ramp), None);
    }

    #[test]
    fn identical_spectra_ratio_one() {
        let x = grid(-2.0, 2.0, 201);
        let c: Vec<f64> = x.iter().map(|x| (1.0 - x.abs()).max(0.0)).collect();
        let s = EfficiencySpectrum::from_curves(Axis::GratingFrequency, x, specs(2), vec![c.clone(), c]);
        let r = compare_case_bandwidths(&s, &s);
        assert_eq!(r.ratio, Some(1.0));
        assert_eq!(r.b_broader(), Some(false));
    }

    #[test]
    fn csv_header_and_rows() {
        let x = vec![1.0, 2.0];
        let s = EfficiencySpectrum::from_curves(Axis::GratingFrequency, x, specs(3), vec![vec![0.5, 1.0]; 3]);
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "axis_value,process_1,process_2,process_3");
        assert_eq!(lines.next().unwrap(), "1.0000000000000000,0.50000000000000000,0.50000000000000000,0.50000000000000000");
        assert!(csv.ends_with('\n'));
    }
}
