use serde::{Deserialize, Serialize};

use super::window_rows;
use crate::error::{Error, Result};
use crate::learners::mean;
use crate::market_data::{EvaluationWindow, PredictorPanel};

/// Competing forecast in the denominator of the out-of-sample R².
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    /// Mean of all targets before each forecast month, recomputed monthly.
    #[default]
    ExpandingMean,
    /// Mean of the realized targets over the whole evaluation window.
    FullMean,
}

/// Benchmark forecasts for every month of `window`.
pub fn benchmark_forecasts(
    panel: &PredictorPanel,
    window: &EvaluationWindow,
    benchmark: Benchmark,
) -> Result<Vec<f64>> {
    let (start, end) = window_rows(panel, window)?;
    let targets = panel.targets();
    Ok(match benchmark {
        Benchmark::ExpandingMean => (start..end).map(|t| mean(&targets[..t])).collect(),
        Benchmark::FullMean => vec![mean(&targets[start..end]); end - start],
    })
}

fn check_aligned(a: &[f64], b: &[f64], what: &str) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Alignment(format!(
            "{what}: {} forecasts against {} actuals",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InsufficientData {
            what: what.into(),
            needed: 1,
            got: 0,
        });
    }
    Ok(())
}

/// `1 − Σ(f − f̂)² / Σ(f − f̄)²` with `f̄` the benchmark forecast.
pub fn oos_r_squared(forecasts: &[f64], actuals: &[f64], benchmark: &[f64]) -> Result<f64> {
    check_aligned(forecasts, actuals, "out-of-sample R²")?;
    check_aligned(benchmark, actuals, "out-of-sample R² benchmark")?;
    let sse: f64 = forecasts.iter().zip(actuals).map(|(f, a)| (a - f).powi(2)).sum();
    let sst: f64 = benchmark.iter().zip(actuals).map(|(b, a)| (a - b).powi(2)).sum();
    if sst == 0.0 {
        return Err(Error::Undefined(
            "benchmark forecast errors sum to zero".into(),
        ));
    }
    Ok(1.0 - sse / sst)
}

/// How forecast and outcome "directions" are compared.
#[derive(Debug, Clone, Copy)]
pub enum DirectionMode<'a> {
    /// Sign of the value itself; zero counts as positive.
    Sign,
    /// Side of a per-month reference level (e.g. the expanding mean).
    VsMean(&'a [f64]),
}

/// Fraction of months where forecast and outcome point the same way.
pub fn directional_accuracy(
    forecasts: &[f64],
    actuals: &[f64],
    mode: DirectionMode<'_>,
) -> Result<f64> {
    check_aligned(forecasts, actuals, "directional accuracy")?;
    let hits = match mode {
        DirectionMode::Sign => forecasts
            .iter()
            .zip(actuals)
            .filter(|(f, a)| (**f >= 0.0) == (**a >= 0.0))
            .count(),
        DirectionMode::VsMean(reference) => {
            check_aligned(reference, actuals, "directional accuracy reference")?;
            forecasts
                .iter()
                .zip(actuals)
                .zip(reference)
                .filter(|((f, a), m)| (**f - **m >= 0.0) == (**a - **m >= 0.0))
                .count()
        }
    };
    Ok(hits as f64 / forecasts.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub r_squared_oos: f64,
    pub directional_accuracy: f64,
    pub n_forecasts: usize,
}

/// R² against `benchmark` plus directional accuracy. Return forecasts are
/// judged by sign; volatility forecasts by side of the expanding mean.
pub fn accuracy_report(
    panel: &PredictorPanel,
    window: &EvaluationWindow,
    forecasts: &[f64],
    benchmark: Benchmark,
) -> Result<AccuracyReport> {
    let (start, end) = window_rows(panel, window)?;
    let actuals = &panel.targets()[start..end];
    let bench = benchmark_forecasts(panel, window, benchmark)?;
    let r_squared_oos = oos_r_squared(forecasts, actuals, &bench)?;
    let directional_accuracy = match panel.feature_set() {
        crate::market_data::FeatureSet::ReturnModel => {
            directional_accuracy(forecasts, actuals, DirectionMode::Sign)?
        }
        crate::market_data::FeatureSet::VolatilityModel => {
            let means = benchmark_forecasts(panel, window, Benchmark::ExpandingMean)?;
            directional_accuracy(forecasts, actuals, DirectionMode::VsMean(&means))?
        }
    };
    Ok(AccuracyReport {
        r_squared_oos,
        directional_accuracy,
        n_forecasts: forecasts.len(),
    })
}
