use crate::error::{Error, Result};

/// Relative distance of `v` above the bound `lb`, in percent.
pub fn gap(v: f64, lb: f64) -> Result<f64> {
    if !(v > 0.0) || !lb.is_finite() {
        return Err(Error::Validation(format!("gap needs a positive finite value, got v={v}, lb={lb}")));
    }
    Ok((v - lb).abs() / v * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        assert_eq!(gap(100.0, 99.0).unwrap(), 1.0);
        assert_eq!(gap(7.5, 7.5).unwrap(), 0.0);
        assert!((gap(4.26e6, 4.098e6).unwrap() - 3.8).abs() < 0.05);
        assert!(gap(0.0, 0.0).is_err());
        assert!(gap(-1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn non_negative_and_zero_only_at_bound(v in 1e-3f64..1e7, f in 0.0f64..1.0) {
            let lb = v * f;
            let g = gap(v, lb).unwrap();
            prop_assert!(g >= 0.0);
            prop_assert_eq!(g == 0.0, lb == v);
        }
    }
}
