//! Transfer-matrix shooting for piecewise-constant slab profiles.
//!
//! This is deliberately independent of the closed-form eigenvalue equations:
//! the field and its weighted derivative are propagated layer by layer, and
//! roots are isolated by counting field zeros (Sturm oscillation count), which
//! cannot skip nearly degenerate pairs of modes.

use crate::error::{Error, Result};

/// Scalar slab problem. `Te`: field and derivative continuous. `Tm`: field and
/// derivative divided by `n^2` continuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wave {
    Te,
    Tm,
}

impl Wave {
    fn weight(self, n: f64) -> f64 {
        match self {
            Wave::Te => 1.0,
            Wave::Tm => n * n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub thickness: f64,
    pub index: f64,
}

/// Finite layers between two semi-infinite claddings.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub left: f64,
    pub layers: Vec<Layer>,
    pub right: f64,
}

impl LayerStack {
    pub fn new(left: f64, layers: Vec<Layer>, right: f64) -> Self {
        Self { left, layers, right }
    }

    pub fn mirrored(&self) -> Self {
        let mut layers = self.layers.clone();
        layers.reverse();
        Self { left: self.right, layers, right: self.left }
    }

    /// Open n_eff interval in which guided modes may exist.
    pub fn guided_window(&self) -> Option<(f64, f64)> {
        let lo = self.left.max(self.right);
        let hi = self.layers.iter().map(|l| l.index).fold(f64::NEG_INFINITY, f64::max);
        (hi > lo).then_some((lo, hi))
    }
}

/// Outcome of shooting at one trial effective index.
#[derive(Debug, Clone, Copy)]
pub struct Shot {
    /// Mismatch with the decaying solution in the right cladding.
    pub residual: f64,
    /// Number of guided modes with effective index above the trial value.
    pub modes_above: usize,
}

pub fn shoot(stack: &LayerStack, wavelength_um: f64, wave: Wave, n_eff: f64) -> Shot {
    let k0 = 2.0 * std::f64::consts::PI / wavelength_um;
    let beta = k0 * n_eff;
    let decay = |n: f64| (beta * beta - k0 * k0 * n * n).max(0.0).sqrt();
    // (psi, psi'/w); left cladding psi = exp(g x)
    let mut psi: f64 = 1.0;
    let mut dpsi = decay(stack.left) / wave.weight(stack.left);
    let mut zeros = 0usize;
    for layer in &stack.layers {
        let w = wave.weight(layer.index);
        let t = layer.thickness;
        let q2 = k0 * k0 * layer.index * layer.index - beta * beta;
        if q2 > 0.0 {
            let q = q2.sqrt();
            // psi(s) = R sin(theta0 + q s)
            let theta0 = psi.atan2(w * dpsi / q);
            let pi = std::f64::consts::PI;
            zeros += (((theta0 + q * t) / pi).floor() as i64 - (theta0 / pi).floor() as i64) as usize;
            let (s, c) = (q * t).sin_cos();
            let p = c * psi + s / q * w * dpsi;
            let d = -q * s / w * psi + c * dpsi;
            psi = p;
            dpsi = d;
        } else {
            let q = (-q2).sqrt();
            let (p, d) = if q * t < 1e-12 {
                (psi + w * dpsi * t, dpsi)
            } else {
                let (s, c) = ((q * t).sinh(), (q * t).cosh());
                (c * psi + s / q * w * dpsi, q * s / w * psi + c * dpsi)
            };
            if p != 0.0 && p.signum() != psi.signum() {
                zeros += 1;
            }
            psi = p;
            dpsi = d;
        }
        let r = psi.hypot(dpsi);
        psi /= r;
        dpsi /= r;
    }
    let residual = dpsi + decay(stack.right) / wave.weight(stack.right) * psi;
    // The growing right-hand solution picks up one more zero exactly when it
    // turns back through the axis.
    if residual != 0.0 && residual.signum() != psi.signum() {
        zeros += 1;
    }
    Shot { residual, modes_above: zeros }
}

/// All guided effective indices of `stack`, in decreasing order.
pub fn transfer_matrix_oracle(stack: &LayerStack, wavelength_um: f64, wave: Wave) -> Result<Vec<f64>> {
    let Some((lo, hi)) = stack.guided_window() else {
        return Ok(Vec::new());
    };
    let span = hi - lo;
    let lo_probe = lo + span * 1e-13;
    let hi_probe = hi - span * 1e-13;
    let total = shoot(stack, wavelength_um, wave, lo_probe).modes_above;
    let mut out = Vec::with_capacity(total);
    for m in 0..total {
        // modes_above(a) > m >= modes_above(b)
        let (mut a, mut b) = (lo_probe, hi_probe);
        if shoot(stack, wavelength_um, wave, b).modes_above > m {
            return Err(Error::NonConvergence(format!("mode {m} lies above the highest core index")));
        }
        let mut iters = 0;
        loop {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if shoot(stack, wavelength_um, wave, mid).modes_above > m {
                a = mid;
            } else {
                b = mid;
            }
            iters += 1;
            if iters > 400 {
                return Err(Error::NonConvergence(format!("oracle bisection for mode {m}")));
            }
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slab(n_core: f64, n_clad: f64, width: f64) -> LayerStack {
        LayerStack::new(n_clad, vec![Layer { thickness: width, index: n_core }], n_clad)
    }

    #[test]
    fn symmetric_slab_mode_count_rule() {
        // A symmetric slab supports ceil(2V/pi) modes of each kind,
        // V = (pi w / lambda) sqrt(n1^2 - n2^2).
        let (n1, n2, lambda): (f64, f64, f64) = (1.50, 1.45, 1.0);
        for &w in &[0.5, 1.0, 2.0, 3.3, 5.0, 8.0] {
            let v = std::f64::consts::PI * w / lambda * (n1 * n1 - n2 * n2).sqrt();
            let expected = (2.0 * v / std::f64::consts::PI).ceil() as usize;
            for wave in [Wave::Te, Wave::Tm] {
                let got = transfer_matrix_oracle(&slab(n1, n2, w), lambda, wave).unwrap();
                assert_eq!(got.len(), expected, "w={w} {wave:?}");
                assert!(got.windows(2).all(|p| p[0] > p[1]));
            }
        }
    }

    #[test]
    fn symmetric_slab_te0_matches_analytic_equation() {
        let (n1, n2, lambda, w) = (1.50, 1.45, 1.0, 2.0);
        let ne = transfer_matrix_oracle(&slab(n1, n2, w), lambda, Wave::Te).unwrap()[0];
        let k0 = 2.0 * std::f64::consts::PI / lambda;
        let kappa = k0 * (n1 * n1 - ne * ne).sqrt();
        let gamma = k0 * (ne * ne - n2 * n2).sqrt();
        assert!(((kappa * w / 2.0).tan() - gamma / kappa).abs() < 1e-9);
    }

    #[test]
    fn mirrored_stack_same_spectrum() {
        let stack = LayerStack::new(
            1.0,
            vec![
                Layer { thickness: 1.2, index: 2.2 },
                Layer { thickness: 0.7, index: 2.1 },
                Layer { thickness: 2.0, index: 2.25 },
            ],
            2.05,
        );
        for wave in [Wave::Te, Wave::Tm] {
            let a = transfer_matrix_oracle(&stack, 1.3, wave).unwrap();
            let b = transfer_matrix_oracle(&stack.mirrored(), 1.3, wave).unwrap();
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn no_guidance_without_a_high_index_layer() {
        let s = slab(1.4, 1.45, 3.0);
        assert!(transfer_matrix_oracle(&s, 1.0, Wave::Te).unwrap().is_empty());
    }
}
