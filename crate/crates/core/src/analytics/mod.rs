//! Strategy returns, wealth, performance statistics, timing regressions,
//! and transaction costs.
//!
//! Annualization: means and alphas ×12, standard deviations ×√12. Standard
//! deviations use the n − 1 divisor.

mod costs;
mod metrics;
mod path;
mod regression;

pub use costs::{break_even_closed_form, transaction_cost_table, turnover, CostRow};
pub use metrics::{
    drawdown, sharpe, sharpe_of_excess, utility_metrics, CeAnnualization, Drawdown, SharpeStats,
    UtilityStats,
};
pub use path::{portfolio_path, portfolio_path_on_panel, PortfolioPath};
pub use regression::{alpha_regression, hm_test, robust_ols, tm_test, CovarianceType, RegressionFit};
