use serde::{Deserialize, Serialize};

use super::PredictorPanel;
use crate::error::{Error, Result};
use crate::month::MonthStamp;

/// Inclusive month range used for forecasting and evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationWindow {
    pub start: MonthStamp,
    pub end: MonthStamp,
}

impl EvaluationWindow {
    pub fn new(start: MonthStamp, end: MonthStamp) -> Result<Self> {
        if end < start {
            return Err(Error::Range(format!("window end {end} precedes start {start}")));
        }
        Ok(Self { start, end })
    }

    pub fn len(&self) -> usize {
        (self.start.months_until(self.end) + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, month: MonthStamp) -> bool {
        self.start <= month && month <= self.end
    }

    pub fn months(&self) -> impl Iterator<Item = MonthStamp> {
        let start = self.start.ordinal();
        (0..self.len() as i64).map(move |i| MonthStamp::from_ordinal(start + i))
    }
}

/// Chronological train / validation / test boundaries (inclusive ends).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train_end: MonthStamp,
    pub validation_end: MonthStamp,
    pub test_end: MonthStamp,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_end: MonthStamp::new(1957, 12).expect("valid"),
            validation_end: MonthStamp::new(1988, 12).expect("valid"),
            test_end: MonthStamp::new(2019, 12).expect("valid"),
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.train_end < self.validation_end && self.validation_end < self.test_end {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "split boundaries must satisfy train_end < validation_end < test_end, got {} / {} / {}",
                self.train_end, self.validation_end, self.test_end
            )))
        }
    }

    pub fn validation_window(&self) -> EvaluationWindow {
        EvaluationWindow {
            start: self.train_end.succ(),
            end: self.validation_end,
        }
    }

    pub fn test_window(&self) -> EvaluationWindow {
        EvaluationWindow {
            start: self.validation_end.succ(),
            end: self.test_end,
        }
    }

    /// Checks that every partition is nonempty within `panel`.
    pub fn check_against(&self, panel: &PredictorPanel) -> Result<()> {
        self.validate()?;
        if panel.is_empty() {
            return Err(Error::Range("panel is empty".into()));
        }
        let (first, last) = (panel.first_month(), panel.last_month());
        if self.train_end < first {
            return Err(Error::Range(format!(
                "train_end {} precedes panel start {first}",
                self.train_end
            )));
        }
        if self.validation_end >= last || self.test_end > last {
            return Err(Error::Range(format!(
                "boundaries {} / {} leave no room inside panel ending {last}",
                self.validation_end, self.test_end
            )));
        }
        Ok(())
    }
}

/// Chronological, disjoint partition of the panel rows up to `test_end`.
pub fn split(
    panel: &PredictorPanel,
    spec: &SplitSpec,
) -> Result<(PredictorPanel, PredictorPanel, PredictorPanel)> {
    spec.check_against(panel)?;
    let a = panel.rows_before(spec.train_end.succ());
    let b = panel.rows_before(spec.validation_end.succ());
    let c = panel.rows_before(spec.test_end.succ());
    Ok((panel.slice(0, a), panel.slice(a, b), panel.slice(b, c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::panel::PanelOutcome;
    use crate::market_data::FeatureSet;
    use proptest::prelude::*;

    fn panel(start: MonthStamp, n: usize) -> PredictorPanel {
        let months = (0..n)
            .map(|i| MonthStamp::from_ordinal(start.ordinal() + i as i64))
            .collect();
        let outcomes = (0..n)
            .map(|i| PanelOutcome {
                market_return: i as f64 * 1e-3,
                riskfree: 0.0,
                realized_variance: 0.002,
                prev_realized_variance: 0.002,
            })
            .collect();
        PredictorPanel::from_parts(
            FeatureSet::ReturnModel,
            months,
            vec!["x".into()],
            (0..n).map(|i| i as f64).collect(),
            outcomes,
        )
        .unwrap()
    }

    #[test]
    fn default_split_test_partition_length() {
        let p = panel(MonthStamp::new(1927, 1).unwrap(), 93 * 12);
        let (train, validation, test) = split(&p, &SplitSpec::default()).unwrap();
        assert_eq!(test.len(), 372);
        assert_eq!(validation.len(), 372);
        assert_eq!(train.len(), 31 * 12);
        assert_eq!(SplitSpec::default().test_window().len(), 372);
    }

    #[test]
    fn train_end_at_last_month_is_range_error() {
        let p = panel(MonthStamp::new(1927, 1).unwrap(), 24);
        let spec = SplitSpec {
            train_end: p.last_month(),
            validation_end: p.last_month().succ(),
            test_end: p.last_month().succ().succ(),
        };
        assert!(matches!(split(&p, &spec), Err(Error::Range(_))));
    }

    #[test]
    fn unordered_boundaries_are_rejected() {
        let p = panel(MonthStamp::new(1927, 1).unwrap(), 24);
        let m = |k| MonthStamp::from_ordinal(p.first_month().ordinal() + k);
        let spec = SplitSpec {
            train_end: m(10),
            validation_end: m(10),
            test_end: m(20),
        };
        assert!(split(&p, &spec).is_err());
    }

    proptest! {
        #[test]
        fn partitions_are_disjoint_and_exhaustive(n in 6usize..60, a in 0i64..60, b in 1i64..60) {
            let p = panel(MonthStamp::new(1950, 1).unwrap(), n);
            let first = p.first_month().ordinal();
            let train_end = MonthStamp::from_ordinal(first + a % (n as i64 - 2));
            let validation_end = MonthStamp::from_ordinal(
                train_end.ordinal() + 1 + b % (p.last_month().ordinal() - train_end.ordinal() - 1).max(1),
            );
            let spec = SplitSpec { train_end, validation_end, test_end: p.last_month() };
            prop_assume!(validation_end < p.last_month());
            let (x, y, z) = split(&p, &spec).unwrap();
            prop_assert_eq!(x.len() + y.len() + z.len(), p.len());
            let mut months: Vec<_> = x.months().to_vec();
            months.extend_from_slice(y.months());
            months.extend_from_slice(z.months());
            prop_assert_eq!(months.as_slice(), p.months());
            prop_assert!(x.last_month() < y.first_month() && y.last_month() < z.first_month());
        }
    }
}
