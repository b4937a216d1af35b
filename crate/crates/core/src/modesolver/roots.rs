//! Bracketing root isolation for transcendental dispersion functions.

/// Sampled root brackets of `f` on the open interval `(lo, hi)`.
///
/// `f` returns `(value, scale)` where `scale` is a magnitude used to detect
/// near-touching minima. Besides plain sign changes on the `points`-sample
/// grid, every local minimum of `|value|/scale` that does not change sign is
/// probed by golden-section search: if the function dips through zero inside
/// the neighbouring cells the pair of roots is split into two brackets. This
/// catches nearly degenerate roots that fall inside a single grid cell.
pub fn bracket_roots<F: Fn(f64) -> (f64, f64)>(f: &F, lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)> {
    let n = points.max(8);
    let span = hi - lo;
    // Stay off the endpoints where the decay or core wavenumber vanishes.
    let x: Vec<f64> = (0..=n)
        .map(|i| {
            let t = (i as f64 / n as f64).clamp(1e-10, 1.0 - 1e-10);
            lo + span * t
        })
        .collect();
    let v: Vec<(f64, f64)> = x.iter().map(|&xi| f(xi)).collect();
    let mut out = Vec::new();
    for i in 0..n {
        let (a, b) = (v[i].0, v[i + 1].0);
        if a == 0.0 {
            out.push((x[i], x[i]));
            continue;
        }
        if a.signum() != b.signum() && b != 0.0 {
            out.push((x[i], x[i + 1]));
        }
    }
    for i in 1..n {
        let r = |k: usize| v[k].0.abs() / v[k].1.max(f64::MIN_POSITIVE);
        let s = v[i].0.signum();
        if v[i - 1].0.signum() != s || v[i + 1].0.signum() != s {
            continue;
        }
        if !(r(i) < r(i - 1) && r(i) <= r(i + 1)) {
            continue;
        }
        // Minimise s*f on [x_{i-1}, x_{i+1}].
        let g = |t: f64| s * f(t).0;
        let xm = golden_min(&g, x[i - 1], x[i + 1], 120);
        if g(xm) < 0.0 {
            out.push((x[i - 1], xm));
            out.push((xm, x[i + 1]));
        }
    }
    out.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    out
}

fn golden_min<F: Fn(f64) -> f64>(g: &F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..iters {
        if gc < 0.0 {
            return c;
        }
        if gd < 0.0 {
            return d;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d);
        }
        if b - a <= 4.0 * f64::EPSILON * b.abs() {
            break;
        }
    }
    if gc < gd {
        c
    } else {
        d
    }
}

/// Bisection on a sign change down to adjacent floating point numbers; returns
/// the end of the final bracket with the smaller `|f|`.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    let mut fhi = f(hi);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    if flo.abs() <= fhi.abs() {
        lo
    } else {
        hi
    }
}
