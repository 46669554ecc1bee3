use serde::Serialize;

use crate::allocation::WeightSeries;
use crate::error::{Error, Result};
use crate::market_data::PredictorPanel;
use crate::month::MonthStamp;

/// Monthly returns and wealth of one strategy, starting from wealth 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioPath {
    pub months: Vec<MonthStamp>,
    pub weights: Vec<f64>,
    /// `w R + (1 − w) R^f`.
    pub strategy_return: Vec<f64>,
    pub riskfree: Vec<f64>,
    /// Wealth at the end of each month.
    pub wealth: Vec<f64>,
}

impl PortfolioPath {
    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    /// Strategy return in excess of the risk-free rate.
    pub fn excess_returns(&self) -> Vec<f64> {
        self.strategy_return
            .iter()
            .zip(&self.riskfree)
            .map(|(r, f)| r - f)
            .collect()
    }

    pub fn terminal_wealth(&self) -> f64 {
        self.wealth.last().copied().unwrap_or(1.0)
    }
}

/// Compounds `w R + (1 − w) R^f` month by month from wealth 1.
pub fn portfolio_path(
    weights: &WeightSeries,
    months: &[MonthStamp],
    market: &[f64],
    riskfree: &[f64],
) -> Result<PortfolioPath> {
    if weights.months != months || market.len() != months.len() || riskfree.len() != months.len() {
        return Err(Error::Alignment(format!(
            "weights for {} months against {} return months",
            weights.months.len(),
            months.len()
        )));
    }
    let mut wealth = Vec::with_capacity(months.len());
    let mut strategy_return = Vec::with_capacity(months.len());
    let mut w_prev = 1.0;
    for ((w, r), f) in weights.weights.iter().zip(market).zip(riskfree) {
        let ret = w * r + (1.0 - w) * f;
        if ret <= -1.0 {
            return Err(Error::Domain(format!("strategy lost all wealth (return {ret})")));
        }
        w_prev *= 1.0 + ret;
        strategy_return.push(ret);
        wealth.push(w_prev);
    }
    Ok(PortfolioPath {
        months: months.to_vec(),
        weights: weights.weights.clone(),
        strategy_return,
        riskfree: riskfree.to_vec(),
        wealth,
    })
}

/// [`portfolio_path`] with returns taken from the panel rows matching the
/// weight months.
pub fn portfolio_path_on_panel(weights: &WeightSeries, panel: &PredictorPanel) -> Result<PortfolioPath> {
    let first = weights
        .months
        .first()
        .ok_or_else(|| Error::InsufficientData {
            what: "weight months".into(),
            needed: 1,
            got: 0,
        })?;
    let start = panel
        .index_of(*first)
        .ok_or_else(|| Error::Alignment(format!("month {first} not in panel")))?;
    let end = start + weights.months.len();
    if end > panel.len() {
        return Err(Error::Alignment("weights extend past the panel".into()));
    }
    portfolio_path(
        weights,
        &panel.months()[start..end],
        &panel.market_returns()[start..end],
        &panel.riskfree()[start..end],
    )
}
