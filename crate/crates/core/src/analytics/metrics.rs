use serde::{Deserialize, Serialize};

use super::PortfolioPath;
use crate::allocation::sample_std;
use crate::error::{Error, Result};
use crate::learners::mean;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpeStats {
    pub annual_return: f64,
    pub annual_std: f64,
    pub sharpe: f64,
}

/// Annualized Sharpe ratio of monthly excess returns.
pub fn sharpe_of_excess(excess: &[f64]) -> Result<f64> {
    if excess.len() < 2 {
        return Err(Error::InsufficientData {
            what: "Sharpe ratio months".into(),
            needed: 2,
            got: excess.len(),
        });
    }
    let sd = sample_std(excess);
    if !(sd > 0.0) {
        return Err(Error::Undefined("excess returns have zero dispersion".into()));
    }
    Ok(12.0 * mean(excess) / (12f64.sqrt() * sd))
}

/// Annual return and volatility of the strategy, and its Sharpe ratio on
/// excess returns.
pub fn sharpe(path: &PortfolioPath) -> Result<SharpeStats> {
    if path.len() < 12 {
        return Err(Error::InsufficientData {
            what: "Sharpe ratio months".into(),
            needed: 12,
            got: path.len(),
        });
    }
    Ok(SharpeStats {
        annual_return: 12.0 * mean(&path.strategy_return),
        annual_std: 12f64.sqrt() * sample_std(&path.strategy_return),
        sharpe: sharpe_of_excess(&path.excess_returns())?,
    })
}

/// How a monthly certainty-equivalent return is stated per year.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CeAnnualization {
    /// `(1 + CE)^12 − 1`.
    #[default]
    Geometric,
    /// `12 · CE`.
    Arithmetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UtilityStats {
    /// Mean power utility of the monthly gross return.
    pub mean_monthly_utility: f64,
    pub ce_monthly: f64,
    pub ce_annual: f64,
    pub terminal_wealth: f64,
}

/// Power utility of monthly gross returns and its certainty equivalent.
/// `γ = 1` is log utility.
pub fn utility_metrics(
    path: &PortfolioPath,
    gamma: f64,
    annualization: CeAnnualization,
) -> Result<UtilityStats> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("risk aversion {gamma} must be positive")));
    }
    if path.is_empty() {
        return Err(Error::InsufficientData {
            what: "utility months".into(),
            needed: 1,
            got: 0,
        });
    }
    let logs = path
        .strategy_return
        .iter()
        .map(|r| {
            let g = 1.0 + r;
            if g > 0.0 {
                Ok(g.ln())
            } else {
                Err(Error::Domain(format!("nonpositive gross return {g}")))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let k = 1.0 - gamma;
    let (mean_monthly_utility, log_ce) = if gamma == 1.0 {
        let m = mean(&logs);
        (m, m)
    } else {
        // mean(g^k) = 1 + x with x accumulated through expm1, so the
        // certainty equivalent stays accurate as γ approaches 1.
        let x = mean(&logs.iter().map(|l| (k * l).exp_m1()).collect::<Vec<_>>());
        ((1.0 + x) / k, x.ln_1p() / k)
    };
    let ce_monthly = log_ce.exp_m1();
    let ce_annual = match annualization {
        CeAnnualization::Geometric => (12.0 * log_ce).exp_m1(),
        CeAnnualization::Arithmetic => 12.0 * ce_monthly,
    };
    Ok(UtilityStats {
        mean_monthly_utility,
        ce_monthly,
        ce_annual,
        terminal_wealth: path.terminal_wealth(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Drawdown {
    /// `wealth / running max − 1`, never positive.
    pub series: Vec<f64>,
    /// Largest decline from a peak as a positive fraction.
    pub max_drawdown: f64,
}

pub fn drawdown(path: &PortfolioPath) -> Result<Drawdown> {
    if path.is_empty() {
        return Err(Error::InsufficientData {
            what: "drawdown months".into(),
            needed: 1,
            got: 0,
        });
    }
    // The path starts from wealth 1 before the first month.
    let mut peak: f64 = 1.0;
    let series: Vec<f64> = path
        .wealth
        .iter()
        .map(|&w| {
            peak = peak.max(w);
            w / peak - 1.0
        })
        .collect();
    let max_drawdown = -series.iter().copied().fold(0.0, f64::min);
    Ok(Drawdown { series, max_drawdown })
}
