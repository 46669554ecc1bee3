//! Forecasts to portfolio weights on the risky asset.
//!
//! Every timing strategy invests `reward / (γ · variance)` in the market,
//! clipped to leverage bounds, and the remainder in the risk-free asset. The
//! strategies differ only in where reward and variance come from.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{mean, ModelFamily};
use crate::market_data::{EvaluationWindow, PredictorPanel};
use crate::month::MonthStamp;
use crate::walkforward::{window_rows, ForecastSeries};

/// Inclusive bounds on the risky-asset weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightBounds {
    pub low: f64,
    pub high: f64,
}

impl WeightBounds {
    pub const fn new(low: f64, high: f64) -> Self {
        Self { low, high }
    }

    /// No shorting, at most 50% leverage.
    pub const LEVERED: Self = Self::new(0.0, 1.5);
    /// No shorting, no leverage.
    pub const UNLEVERED: Self = Self::new(0.0, 1.0);
    pub const UNBOUNDED: Self = Self::new(f64::NEG_INFINITY, f64::INFINITY);

    pub fn validate(&self) -> Result<()> {
        if self.low.is_nan() || self.high.is_nan() || self.low > self.high {
            return Err(Error::Config(format!(
                "weight bounds ({}, {}) are not an interval",
                self.low, self.high
            )));
        }
        Ok(())
    }

    pub fn clip(&self, w: f64) -> f64 {
        w.clamp(self.low, self.high)
    }
}

impl Default for WeightBounds {
    fn default() -> Self {
        Self::LEVERED
    }
}

/// `clip(reward / (γ · variance), low, high)`.
pub fn optimal_weight(reward: f64, variance: f64, gamma: f64, bounds: WeightBounds) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(Error::Domain(format!("variance {variance} must be positive")));
    }
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("risk aversion {gamma} must be positive")));
    }
    Ok(bounds.clip(reward / (gamma * variance)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardSource {
    /// The return model's forecast.
    Model,
    /// Mean excess return over all months before `t`.
    ExpandingMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskSource {
    /// Square of the volatility model's forecast.
    Model,
    /// Realized variance of month `t − 1`.
    PreviousRealized,
}

/// One cell of the strategy grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyId {
    /// Always fully invested in the market.
    BuyHold,
    Timing {
        reward: RewardSource,
        risk: RiskSource,
        family: Option<ModelFamily>,
    },
}

impl StrategyId {
    /// Expanding-mean reward over last month's realized variance.
    pub const BASE: Self = Self::Timing {
        reward: RewardSource::ExpandingMean,
        risk: RiskSource::PreviousRealized,
        family: None,
    };

    pub fn optimal(family: ModelFamily) -> Self {
        Self::Timing {
            reward: RewardSource::Model,
            risk: RiskSource::Model,
            family: Some(family),
        }
    }

    pub fn returns(family: ModelFamily) -> Self {
        Self::Timing {
            reward: RewardSource::Model,
            risk: RiskSource::PreviousRealized,
            family: Some(family),
        }
    }

    pub fn volatility(family: ModelFamily) -> Self {
        Self::Timing {
            reward: RewardSource::ExpandingMean,
            risk: RiskSource::Model,
            family: Some(family),
        }
    }

    /// Buy-and-hold, Base, and the Optimal / Returns / Volatility variants
    /// of each family.
    pub fn grid(families: &[ModelFamily]) -> Vec<Self> {
        let mut out = vec![Self::BuyHold, Self::BASE];
        for &f in families {
            out.extend([Self::optimal(f), Self::returns(f), Self::volatility(f)]);
        }
        out
    }

    pub fn family(&self) -> Option<ModelFamily> {
        match self {
            Self::BuyHold => None,
            Self::Timing { family, .. } => *family,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::Timing { reward, risk, family } = self {
            let uses_model = *reward == RewardSource::Model || *risk == RiskSource::Model;
            if uses_model != family.is_some() {
                return Err(Error::Config(format!(
                    "strategy {self} must name a model family exactly when it uses model forecasts"
                )));
            }
        }
        Ok(())
    }

    fn variant(&self) -> Option<&'static str> {
        match self {
            Self::BuyHold => None,
            Self::Timing { reward, risk, .. } => Some(match (reward, risk) {
                (RewardSource::Model, RiskSource::Model) => "optimal",
                (RewardSource::Model, RiskSource::PreviousRealized) => "returns",
                (RewardSource::ExpandingMean, RiskSource::Model) => "volatility",
                (RewardSource::ExpandingMean, RiskSource::PreviousRealized) => "base",
            }),
        }
    }

    /// Human-readable label, e.g. "Random Forest Optimal".
    pub fn label(&self) -> String {
        match (self, self.family()) {
            (Self::BuyHold, _) => "Mkt".into(),
            (_, None) => "Base".into(),
            (_, Some(f)) => {
                let v = self.variant().expect("timing");
                let mut cap = v.to_string();
                cap[..1].make_ascii_uppercase();
                format!("{} {cap}", f.display_name())
            }
        }
    }

    /// Inverse of `Display`.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "buy_hold" => return Some(Self::BuyHold),
            "base" => return Some(Self::BASE),
            _ => {}
        }
        let (family, variant) = s.rsplit_once('_')?;
        let family = ModelFamily::parse(family)?;
        match variant {
            "optimal" => Some(Self::optimal(family)),
            "returns" => Some(Self::returns(family)),
            "volatility" => Some(Self::volatility(family)),
            _ => None,
        }
    }
}

impl fmt::Display for StrategyId {
    /// Machine key, e.g. `forest_optimal`, `base`, `buy_hold`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self, self.family()) {
            (Self::BuyHold, _) => f.write_str("buy_hold"),
            (_, None) => f.write_str("base"),
            (_, Some(fam)) => write!(f, "{}_{}", fam.as_str(), self.variant().expect("timing")),
        }
    }
}

/// Post-clipping risky-asset weights of one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSeries {
    pub strategy: StrategyId,
    pub months: Vec<MonthStamp>,
    pub weights: Vec<f64>,
    pub gamma: f64,
    pub bounds: WeightBounds,
}

fn window_months(panel: &PredictorPanel, start: usize, end: usize) -> Vec<MonthStamp> {
    panel.months()[start..end].to_vec()
}

fn expanding_means(panel: &PredictorPanel, start: usize, end: usize) -> Vec<f64> {
    let ex = panel.excess_returns();
    (start..end).map(|t| mean(&ex[..t])).collect()
}

/// Expanding-mean excess return over `γ` times last month's realized
/// variance.
pub fn base_weights(
    panel: &PredictorPanel,
    window: &EvaluationWindow,
    gamma: f64,
    bounds: WeightBounds,
) -> Result<WeightSeries> {
    strategy_weights(StrategyId::BASE, panel, window, None, gamma, bounds)
}

/// Weights of `strategy` over `window`. Model-driven strategies read the
/// forecast columns they need from `forecasts`, whose months must match the
/// window exactly.
pub fn strategy_weights(
    strategy: StrategyId,
    panel: &PredictorPanel,
    window: &EvaluationWindow,
    forecasts: Option<&ForecastSeries>,
    gamma: f64,
    bounds: WeightBounds,
) -> Result<WeightSeries> {
    strategy.validate()?;
    bounds.validate()?;
    let (start, end) = window_rows(panel, window)?;
    let months = window_months(panel, start, end);
    let weights = match strategy {
        StrategyId::BuyHold => vec![1.0; end - start],
        StrategyId::Timing { reward, risk, .. } => {
            let needs_model = reward == RewardSource::Model || risk == RiskSource::Model;
            let fc = if needs_model {
                let fc = forecasts.ok_or_else(|| Error::Dependency {
                    column: match reward {
                        RewardSource::Model => "return_forecast".into(),
                        RewardSource::ExpandingMean => "vol_forecast".into(),
                    },
                })?;
                if fc.months != months {
                    return Err(Error::Alignment(format!(
                        "forecasts for {} cover {} months, window has {}",
                        fc.model,
                        fc.len(),
                        months.len()
                    )));
                }
                Some(fc)
            } else {
                None
            };
            let rewards: Vec<f64> = match reward {
                RewardSource::Model => fc.expect("checked").returns()?.to_vec(),
                RewardSource::ExpandingMean => expanding_means(panel, start, end),
            };
            let variances: Vec<f64> = match risk {
                RiskSource::Model => fc.expect("checked").volatilities()?.iter().map(|s| s * s).collect(),
                RiskSource::PreviousRealized => panel.prev_realized_variances()[start..end].to_vec(),
            };
            rewards
                .iter()
                .zip(&variances)
                .map(|(&r, &v)| optimal_weight(r, v, gamma, bounds))
                .collect::<Result<_>>()?
        }
    };
    Ok(WeightSeries {
        strategy,
        months,
        weights,
        gamma,
        bounds,
    })
}

/// Sample standard deviation (n − 1 divisor).
pub(crate) fn sample_std(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)).sqrt()
}

/// Volatility-timing reference weights `c / σ²_{t−1}` with the constant `c`
/// chosen so the strategy's full-window return standard deviation equals
/// `target_std`. Uses the whole window, so it is a look-ahead benchmark,
/// not a tradable strategy. Returns the weights and `c`.
pub fn vol_timing_constant_weights(
    panel: &PredictorPanel,
    window: &EvaluationWindow,
    target_std: f64,
    bounds: WeightBounds,
) -> Result<(WeightSeries, f64)> {
    bounds.validate()?;
    if !(target_std >= 0.0) {
        return Err(Error::Domain(format!("target std {target_std} must be >= 0")));
    }
    let (start, end) = window_rows(panel, window)?;
    if end - start < 2 {
        return Err(Error::InsufficientData {
            what: "volatility-timing calibration months".into(),
            needed: 2,
            got: end - start,
        });
    }
    let prev = &panel.prev_realized_variances()[start..end];
    if let Some(bad) = prev.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Domain(format!("realized variance {bad} must be positive")));
    }
    let mkt = &panel.market_returns()[start..end];
    let rf = &panel.riskfree()[start..end];
    let weights_for = |c: f64| -> Vec<f64> { prev.iter().map(|v| bounds.clip(c / v)).collect() };
    let std_for = |c: f64| -> f64 {
        let r: Vec<f64> = weights_for(c)
            .iter()
            .zip(mkt.iter().zip(rf))
            .map(|(w, (m, f))| w * m + (1.0 - w) * f)
            .collect();
        sample_std(&r)
    };

    let mut lo = 0.0;
    let mut hi = prev.iter().copied().fold(0.0, f64::max).max(1e-12);
    let mut grew = 0;
    while std_for(hi) < target_std && grew < 200 {
        lo = hi;
        hi *= 2.0;
        grew += 1;
    }
    let c = if std_for(hi) < target_std {
        log::warn!("target std {target_std} unreachable under bounds; using the largest attainable");
        hi
    } else {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if std_for(mid) < target_std {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (dl, dh) = ((std_for(lo) - target_std).abs(), (std_for(hi) - target_std).abs());
        if dl <= dh {
            lo
        } else {
            hi
        }
    };
    let series = WeightSeries {
        strategy: StrategyId::BASE,
        months: window_months(panel, start, end),
        weights: weights_for(c),
        gamma: f64::NAN,
        bounds,
    };
    Ok((series, c))
}

/// Writes `date,strategy,weight` rows for every series.
pub fn write_weights_csv(path: impl AsRef<Path>, series: &[WeightSeries]) -> Result<()> {
    use std::io::Write;
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "date,strategy,weight").map_err(io)?;
    for s in series {
        for (m, w) in s.months.iter().zip(&s.weights) {
            writeln!(out, "{m},{},{w}", s.strategy).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}
