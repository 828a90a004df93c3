//! Shared helpers for CSV reports.

/// Float with 17 significant digits, round-trip exact.
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(f17(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(f17(1.0), "1.0000000000000000e0");
    }
}
