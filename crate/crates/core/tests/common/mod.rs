#![allow(dead_code)]

use std::sync::OnceLock;
use tricoupler::design::Designer;
use tricoupler::spdc::ModeTable;
use tricoupler::{CouplerGeometry, MaterialModel};

pub const PUMP_UM: f64 = 0.675;
pub const DEGENERATE_UM: f64 = 1.35;

pub fn design_table() -> &'static ModeTable {
    static T: OnceLock<ModeTable> = OnceLock::new();
    T.get_or_init(|| {
        ModeTable::solve(&MaterialModel::default(), &CouplerGeometry::default(), PUMP_UM, DEGENERATE_UM).unwrap()
    })
}

pub fn designer() -> Designer {
    Designer::new(MaterialModel::default(), CouplerGeometry::default(), PUMP_UM).unwrap()
}

/// Bisection on a bracketing interval; independent of the crate's root finder.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}
