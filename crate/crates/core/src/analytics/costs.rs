use serde::Serialize;

use super::{alpha_regression, CovarianceType, PortfolioPath};
use crate::error::{Error, Result};
use crate::learners::mean;

/// `|w_t − w_{t−1}|` from the second month on.
pub fn turnover(weights: &[f64]) -> Vec<f64> {
    weights.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
}

/// `alpha / (12 · mean turnover)`: the break-even monthly cost per unit
/// turnover when costs shift returns but not the market beta.
pub fn break_even_closed_form(alpha_annual: f64, mean_turnover: f64) -> Option<f64> {
    (mean_turnover > 0.0).then(|| alpha_annual / (12.0 * mean_turnover))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostRow {
    pub cost_bps: f64,
    pub mean_turnover: f64,
    /// 12 × mean pre-cost strategy return.
    pub gross_annual_return: f64,
    pub alpha_pre_annual: f64,
    pub alpha_post_annual: f64,
    /// Cost per unit turnover at which alpha vanishes, in basis points.
    /// `None` when the strategy never trades.
    pub break_even_bps: Option<f64>,
}

/// Pre- and post-cost alphas against the market for each cost level.
///
/// A cost of `c` per unit turnover lowers the month-`t` return by
/// `c |Δw_t|` (no charge in the first month). Alpha is linear in `c`, so the
/// break-even cost is found exactly from the alpha of the turnover series
/// itself.
pub fn transaction_cost_table(
    path: &PortfolioPath,
    market_excess: &[f64],
    costs_bps: &[f64],
    covariance: CovarianceType,
) -> Result<Vec<CostRow>> {
    if market_excess.len() != path.len() {
        return Err(Error::Alignment(format!(
            "{} strategy months against {} market months",
            path.len(),
            market_excess.len()
        )));
    }
    if path.len() < 2 {
        return Err(Error::InsufficientData {
            what: "transaction cost months".into(),
            needed: 2,
            got: path.len(),
        });
    }
    let mut charge = vec![0.0];
    charge.extend(turnover(&path.weights));
    let mean_turnover = mean(&charge[1..]);
    let excess = path.excess_returns();
    let pre = alpha_regression(&excess, market_excess, covariance)?;
    let drag = alpha_regression(&charge, market_excess, covariance)?.alpha();
    let break_even_bps = (drag > 0.0).then(|| pre.alpha() / drag * 1e4);

    costs_bps
        .iter()
        .map(|&bps| {
            if !(bps >= 0.0) {
                return Err(Error::Config(format!("cost {bps} bps must be >= 0")));
            }
            let c = bps * 1e-4;
            let net: Vec<f64> = excess.iter().zip(&charge).map(|(r, d)| r - c * d).collect();
            let post = alpha_regression(&net, market_excess, covariance)?;
            Ok(CostRow {
                cost_bps: bps,
                mean_turnover,
                gross_annual_return: 12.0 * mean(&path.strategy_return),
                alpha_pre_annual: pre.alpha_annual(),
                alpha_post_annual: post.alpha_annual(),
                break_even_bps,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::month::MonthStamp;

    fn path(weights: Vec<f64>, market: &[f64]) -> PortfolioPath {
        let start = MonthStamp::new(1989, 1).unwrap();
        let n = weights.len();
        let strategy_return: Vec<f64> = weights.iter().zip(market).map(|(w, m)| w * m).collect();
        PortfolioPath {
            months: (0..n as i64).map(|i| MonthStamp::from_ordinal(start.ordinal() + i)).collect(),
            wealth: strategy_return
                .iter()
                .scan(1.0, |w, r| {
                    *w *= 1.0 + r;
                    Some(*w)
                })
                .collect(),
            strategy_return,
            riskfree: vec![0.0; n],
            weights,
        }
    }

    fn market(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i * 29) % 17) as f64 * 0.005 - 0.04).collect()
    }

    #[test]
    fn closed_form_example() {
        assert!((break_even_closed_form(0.024, 0.2).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(break_even_closed_form(0.024, 0.0), None);
    }

    #[test]
    fn constant_weights_cost_nothing() {
        let m = market(40);
        let p = path(vec![0.8; 40], &m);
        let rows = transaction_cost_table(&p, &m, &[1.0, 10.0, 14.0], CovarianceType::Hc0).unwrap();
        for r in rows {
            assert_eq!(r.mean_turnover, 0.0);
            assert_eq!(r.alpha_post_annual, r.alpha_pre_annual);
            assert_eq!(r.break_even_bps, None);
        }
    }

    #[test]
    fn alpha_vanishes_at_break_even() {
        let m = market(60);
        let w: Vec<f64> = (0..60).map(|i| 0.5 + ((i * 7) % 5) as f64 * 0.2).collect();
        let mut p = path(w, &m);
        // Add a positive alpha source.
        for r in &mut p.strategy_return {
            *r += 0.002;
        }
        let rows = transaction_cost_table(&p, &m, &[0.0, 10.0], CovarianceType::Hc0).unwrap();
        assert!(rows[1].alpha_post_annual < rows[0].alpha_post_annual);
        let be = rows[0].break_even_bps.unwrap();
        let at = transaction_cost_table(&p, &m, &[be], CovarianceType::Hc0).unwrap();
        assert!(at[0].alpha_post_annual.abs() < 1e-9);
    }
}
