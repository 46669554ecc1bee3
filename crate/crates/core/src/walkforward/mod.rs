//! Expanding-window refit-and-forecast loop, validation tuning, and
//! forecast accuracy.
//!
//! The forecast for month `t` always comes from a model fitted on panel rows
//! strictly before `t`. Panel rows already carry features lagged by one
//! month, so row `t` itself is a legitimate query point.

mod accuracy;
mod forecast;
mod tune;

pub use accuracy::{
    accuracy_report, benchmark_forecasts, directional_accuracy, oos_r_squared, AccuracyReport,
    Benchmark, DirectionMode,
};
pub use forecast::{read_forecasts_csv, write_forecasts_csv, ForecastSeries, VOLATILITY_FLOOR};
pub use tune::{tune, CandidateScore, TuningGrid, TuningResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::LearnerConfig;
use crate::market_data::{trim_mask, EvaluationWindow, FeatureSet, PredictorPanel};
use crate::month::MonthStamp;

/// Knobs of one walk-forward pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkOptions {
    /// Quantile of |excess return| above which training rows are dropped.
    /// Only applied to return-model panels; `None` disables trimming.
    #[serde(default)]
    pub trim: Option<f64>,
    /// Months between refits. 1 refits every month.
    #[serde(default = "one")]
    pub refit_every: usize,
    /// Fit the learner on `ln(target)` and exponentiate its forecasts.
    #[serde(default)]
    pub log_target: bool,
}

fn one() -> usize {
    1
}

impl Default for WalkOptions {
    fn default() -> Self {
        Self {
            trim: None,
            refit_every: 1,
            log_target: false,
        }
    }
}

impl WalkOptions {
    pub fn validate(&self) -> Result<()> {
        if self.refit_every == 0 {
            return Err(Error::Config("refit_every must be at least 1".into()));
        }
        if let Some(q) = self.trim {
            if !(q > 0.0 && q <= 1.0) {
                return Err(Error::Config(format!("trim quantile {q} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Out-of-sample forecasts of one learner over one window.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkResult {
    pub months: Vec<MonthStamp>,
    pub forecasts: Vec<f64>,
    /// Realized target for each forecast month.
    pub actuals: Vec<f64>,
    /// Last panel month in the training set behind each forecast.
    pub cutoffs: Vec<MonthStamp>,
    /// Number of model fits performed.
    pub fits: usize,
}

/// Row range `start..end` of `window` inside `panel`, requiring at least one
/// training row before the window.
pub fn window_rows(panel: &PredictorPanel, window: &EvaluationWindow) -> Result<(usize, usize)> {
    let start = panel.index_of(window.start).ok_or_else(|| {
        Error::Range(format!(
            "window start {} outside panel {}..{}",
            window.start,
            panel.first_month(),
            panel.last_month()
        ))
    })?;
    let end = panel.index_of(window.end).ok_or_else(|| {
        Error::Range(format!(
            "window end {} outside panel {}..{}",
            window.end,
            panel.first_month(),
            panel.last_month()
        ))
    })? + 1;
    if start == 0 {
        return Err(Error::InsufficientData {
            what: "training rows before the forecast window".into(),
            needed: 1,
            got: 0,
        });
    }
    Ok((start, end))
}

/// Expanding-window forecasts: for each month in `window`, fit on every
/// panel row before it and predict that month's row.
pub fn walk_forecast(
    panel: &PredictorPanel,
    learner: &LearnerConfig,
    window: &EvaluationWindow,
    options: &WalkOptions,
) -> Result<WalkResult> {
    learner.validate()?;
    options.validate()?;
    let (start, end) = window_rows(panel, window)?;
    let trim = match panel.feature_set() {
        FeatureSet::ReturnModel => options.trim.filter(|&q| q < 1.0),
        FeatureSet::VolatilityModel => None,
    };
    if options.log_target {
        if let Some(bad) = panel.targets()[..end].iter().find(|&&y| y <= 0.0) {
            return Err(Error::Domain(format!(
                "log target requires positive targets, found {bad}"
            )));
        }
    }

    let targets = panel.targets();
    let mut result = WalkResult {
        months: Vec::with_capacity(end - start),
        forecasts: Vec::with_capacity(end - start),
        actuals: Vec::with_capacity(end - start),
        cutoffs: Vec::with_capacity(end - start),
        fits: 0,
    };
    let mut model = None;
    let mut cutoff = panel.first_month();
    for (step, t) in (start..end).enumerate() {
        if step % options.refit_every == 0 {
            let rows: Vec<usize> = match trim {
                Some(q) => trim_mask(&panel.excess_returns()[..t], q)?
                    .into_iter()
                    .enumerate()
                    .filter_map(|(i, keep)| keep.then_some(i))
                    .collect(),
                None => (0..t).collect(),
            };
            let mut data = panel.dataset(&rows)?;
            if options.log_target {
                data = data.map_targets(f64::ln);
            }
            model = Some(learner.fit(&data)?);
            result.fits += 1;
            cutoff = panel.months()[t - 1];
        }
        let raw = model.as_ref().expect("fitted on first step").predict(panel.row(t));
        let forecast = if options.log_target { raw.exp() } else { raw };
        result.months.push(panel.months()[t]);
        result.forecasts.push(forecast);
        result.actuals.push(targets[t]);
        result.cutoffs.push(cutoff);
    }
    Ok(result)
}


#[cfg(test)]
mod tests {
    use super::test_support::return_panel;
    use super::*;
    use crate::learners::ForestConfig;

    fn window(panel: &PredictorPanel, from: usize, to: usize) -> EvaluationWindow {
        EvaluationWindow::new(panel.months()[from], panel.months()[to]).unwrap()
    }

    #[test]
    fn prevailing_mean_expands() {
        let p = return_panel(&[1.0, 2.0, 3.0, 4.0]);
        let r = walk_forecast(&p, &LearnerConfig::PrevailingMean, &window(&p, 2, 3), &WalkOptions::default())
            .unwrap();
        assert_eq!(r.forecasts, vec![1.5, 2.0]);
        assert_eq!(r.actuals, vec![3.0, 4.0]);
        assert_eq!(r.cutoffs, vec![p.months()[1], p.months()[2]]);
    }

    #[test]
    fn one_fit_per_month() {
        let targets: Vec<f64> = (0..30).map(|i| ((i * 7) % 5) as f64 * 0.01).collect();
        let p = return_panel(&targets);
        let cfg = LearnerConfig::Forest(ForestConfig {
            n_trees: 5,
            m_try: 1,
            ..ForestConfig::return_default()
        });
        let r = walk_forecast(&p, &cfg, &window(&p, 28, 29), &WalkOptions::default()).unwrap();
        assert_eq!(r.fits, 2);
        let coarse = WalkOptions {
            refit_every: 12,
            ..WalkOptions::default()
        };
        let r = walk_forecast(&p, &cfg, &window(&p, 5, 29), &coarse).unwrap();
        assert_eq!(r.fits, 3);
    }

    #[test]
    fn window_starting_at_first_row_has_no_training_data() {
        let p = return_panel(&[1.0, 2.0]);
        let err = walk_forecast(&p, &LearnerConfig::PrevailingMean, &window(&p, 0, 1), &WalkOptions::default());
        assert!(matches!(err, Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn trimming_drops_outliers_from_training_only() {
        let mut targets = vec![0.01; 10];
        targets[3] = 1.0;
        targets.push(5.0);
        let p = return_panel(&targets);
        let opts = WalkOptions {
            trim: Some(0.9),
            ..WalkOptions::default()
        };
        let r = walk_forecast(&p, &LearnerConfig::PrevailingMean, &window(&p, 10, 10), &opts).unwrap();
        assert!((r.forecasts[0] - 0.01).abs() < 1e-15);
        assert_eq!(r.actuals, vec![5.0]);
    }
}
