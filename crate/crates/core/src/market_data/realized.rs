use crate::error::{Error, Result};

/// Fewest trading days accepted for a monthly realized variance.
pub const MIN_TRADING_DAYS: usize = 10;

/// Within-month sum of squared deviations from the monthly mean.
///
/// Sums over however many days are present rather than a fixed 22.
pub fn sum_squared_deviations(daily: &[f64]) -> f64 {
    if daily.is_empty() {
        return 0.0;
    }
    // Deviations are taken from the first day before centering so that a
    // month of identical returns yields exactly zero.
    let origin = daily[0];
    let shift = daily.iter().map(|r| r - origin).sum::<f64>() / daily.len() as f64;
    daily.iter().map(|r| (r - origin - shift).powi(2)).sum()
}

/// Realized variance of one month of daily excess returns.
pub fn realized_variance(daily: &[f64]) -> Result<f64> {
    if daily.len() < MIN_TRADING_DAYS {
        return Err(Error::InsufficientData {
            what: "realized variance".into(),
            needed: MIN_TRADING_DAYS,
            got: daily.len(),
        });
    }
    Ok(sum_squared_deviations(daily))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_returns_have_zero_variance() {
        let v = realized_variance(&[0.001; 21]).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn two_day_hand_computation() {
        let v = sum_squared_deviations(&[0.01, -0.01]);
        assert!((v - 0.0002).abs() < 1e-18);
    }

    #[test]
    fn alternating_month() {
        let days: Vec<f64> = (0..22).map(|i| if i % 2 == 0 { 0.01 } else { -0.01 }).collect();
        let v = realized_variance(&days).unwrap();
        assert!((v - 0.0022).abs() < 1e-15);
    }

    #[test]
    fn short_month_is_rejected() {
        let err = realized_variance(&[0.01, -0.01]).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { got: 2, .. }));
    }

    proptest! {
        #[test]
        fn matches_scaled_sample_variance(days in prop::collection::vec(-0.1f64..0.1, 10..30)) {
            let v = realized_variance(&days).unwrap();
            prop_assert!(v >= 0.0);
            let n = days.len() as f64;
            let mean = days.iter().sum::<f64>() / n;
            let sample_var = days.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
            prop_assert!((v - (n - 1.0) * sample_var).abs() <= 1e-12);
        }
    }
}
