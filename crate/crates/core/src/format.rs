//! Locale-free numeric formatting for CSV and report output.

/// Fixed-point decimal carrying 17 significant digits.
pub fn sig17(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return format!("{:.16}", 0.0);
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (16 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Short scientific notation for diagnostics.
pub fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(sig17(1.0), "1.0000000000000000");
        assert_eq!(sig17(0.9074), "0.90739999999999998");
        assert_eq!(sig17(1350.0), "1350.0000000000000");
        assert_eq!(sig17(-2.5e-3), "-0.0025000000000000001");
        assert_eq!(sig17(0.0), "0.0000000000000000");
        assert_eq!(sig17(-0.0), "0.0000000000000000");
        assert_eq!(sig17(1e20), "100000000000000000000");
    }

    #[test]
    fn round_trips() {
        for &x in &[0.1, 2.1359329658939083, 6.92e-7, 123456.789, -3.3e-12] {
            assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
        }
    }
}
