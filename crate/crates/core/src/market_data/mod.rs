//! Monthly and daily input ingestion, realized variance, and lagged
//! predictor panels.
//!
//! Every feature in row `t` of a [`PredictorPanel`] is observable at the end
//! of month `t-1`. Targets and the contemporaneous return columns belong to
//! month `t` itself and are never fed to a learner as inputs.

mod load;
mod panel;
mod realized;
mod split;
mod trim;

pub use load::{load_daily, load_monthly, DailySchema, MonthlySchema};
pub use panel::{build_panel, FeatureSet, PanelOutcome, PredictorPanel, MACRO_PREDICTORS};
pub use realized::{realized_variance, sum_squared_deviations, MIN_TRADING_DAYS};
pub use split::{split, EvaluationWindow, SplitSpec};
pub use trim::{abs_quantile_cutoff, trim_mask, trim_outliers};

use crate::error::{Error, Result};
use crate::month::MonthStamp;

/// A named monthly series without interior gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    name: String,
    start: MonthStamp,
    values: Vec<f64>,
}

impl RawSeries {
    /// Builds a series from `(month, value)` pairs, which must be strictly
    /// increasing and contiguous.
    pub fn from_observations(
        name: impl Into<String>,
        observations: impl IntoIterator<Item = (MonthStamp, f64)>,
    ) -> Result<Self> {
        let name = name.into();
        let mut iter = observations.into_iter();
        let Some((start, first)) = iter.next() else {
            return Err(Error::InsufficientData {
                what: format!("series \"{name}\""),
                needed: 1,
                got: 0,
            });
        };
        let mut values = vec![first];
        let mut expected = start.succ();
        for (month, value) in iter {
            if month != expected {
                if month > expected {
                    return Err(Error::Gap {
                        series: name,
                        missing: expected,
                    });
                }
                return Err(Error::Range(format!(
                    "series \"{name}\" is not strictly increasing at {month}"
                )));
            }
            values.push(value);
            expected = expected.succ();
        }
        Ok(Self {
            name,
            start,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start(&self) -> MonthStamp {
        self.start
    }

    pub fn end(&self) -> MonthStamp {
        MonthStamp::from_ordinal(self.start.ordinal() + self.values.len() as i64 - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, month: MonthStamp) -> Option<f64> {
        let offset = self.start.months_until(month);
        usize::try_from(offset)
            .ok()
            .and_then(|i| self.values.get(i).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (MonthStamp, f64)> + '_ {
        let start = self.start.ordinal();
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (MonthStamp::from_ordinal(start + i as i64), *v))
    }

    /// Copy restricted to months `<= last`.
    pub fn truncated(&self, last: MonthStamp) -> Option<Self> {
        let keep = self.start.months_until(last) + 1;
        if keep <= 0 {
            return None;
        }
        let keep = (keep as usize).min(self.values.len());
        Some(Self {
            name: self.name.clone(),
            start: self.start,
            values: self.values[..keep].to_vec(),
        })
    }
}

/// One trading day of a month.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DailyObservation {
    pub day: u8,
    pub excess_return: f64,
}

/// Daily excess returns grouped by calendar month.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyReturns {
    months: Vec<(MonthStamp, Vec<DailyObservation>)>,
}

impl DailyReturns {
    /// Validates month ordering, strictly increasing days and the minimum
    /// group size of [`MIN_TRADING_DAYS`].
    pub fn new(months: Vec<(MonthStamp, Vec<DailyObservation>)>) -> Result<Self> {
        for pair in months.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::Range(format!(
                    "daily months not strictly increasing at {}",
                    pair[1].0
                )));
            }
        }
        for (month, days) in &months {
            if days.len() < MIN_TRADING_DAYS {
                return Err(Error::InsufficientData {
                    what: format!("daily returns in {month}"),
                    needed: MIN_TRADING_DAYS,
                    got: days.len(),
                });
            }
            if days.windows(2).any(|w| w[1].day <= w[0].day) {
                return Err(Error::Range(format!(
                    "daily observations in {month} are not strictly increasing"
                )));
            }
        }
        Ok(Self { months })
    }

    pub fn months(&self) -> impl Iterator<Item = MonthStamp> + '_ {
        self.months.iter().map(|(m, _)| *m)
    }

    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    pub fn group(&self, month: MonthStamp) -> Option<&[DailyObservation]> {
        self.months
            .binary_search_by_key(&month, |(m, _)| *m)
            .ok()
            .map(|i| self.months[i].1.as_slice())
    }

    /// Realized variance for every month, as a contiguous series.
    pub fn realized_variance_series(&self) -> Result<RawSeries> {
        let mut obs = Vec::with_capacity(self.months.len());
        for (month, days) in &self.months {
            let returns: Vec<f64> = days.iter().map(|d| d.excess_return).collect();
            obs.push((*month, realized_variance(&returns)?));
        }
        RawSeries::from_observations("realized_variance", obs)
    }
}
