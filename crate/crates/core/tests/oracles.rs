//! Library results checked against independent reference implementations.

mod common;

use rand::Rng;

use common::*;
use rewardrisk::allocation::{
    optimal_weight, strategy_weights, RewardSource, RiskSource, StrategyId, WeightBounds,
};
use rewardrisk::analytics::{
    portfolio_path_on_panel, robust_ols, sharpe, sharpe_of_excess, CovarianceType,
};
use rewardrisk::explain::explain;
use rewardrisk::learners::{
    fit_elastic_net, fit_ols, fit_tree_on_rows, ElasticNetConfig, LearnerConfig, ModelFamily, OlsConfig,
    TreeParams,
};
use rewardrisk::market_data::EvaluationWindow;
use rewardrisk::walkforward::{tune, walk_forecast, Benchmark, ForecastSeries, TuningGrid, WalkOptions};

#[test]
fn ols_matches_normal_equations() {
    let mut rng = rng(10);
    for _ in 0..30 {
        let p = rng.random_range(1..=8);
        let n = rng.random_range(p + 3..=80);
        let rows = random_rows(&mut rng, n, p);
        let y: Vec<f64> = rows.iter().map(|r| r.iter().sum::<f64>() + normal(&mut rng)).collect();
        let fit = fit_ols(&dataset(&rows, &y), &OlsConfig::default()).unwrap();
        let oracle = normal_equation_ols(&rows, &y);
        assert!((fit.intercept - oracle[0]).abs() < 1e-9);
        for (a, b) in fit.coefficients.iter().zip(&oracle[1..]) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn ols_rejects_collinear_design() {
    let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
    let y: Vec<f64> = (0..20).map(|i| i as f64).collect();
    assert!(matches!(
        fit_ols(&dataset(&rows, &y), &OlsConfig::default()),
        Err(rewardrisk::Error::Singular(_))
    ));
}

/// With one standardized feature the elastic net has the closed form
/// `S(q, λα/2) / (1 + λ(1−α)/2)` where `q` is the feature/target covariance.
#[test]
fn univariate_elastic_net_closed_form() {
    let mut rng = rng(11);
    for _ in 0..50 {
        let n = rng.random_range(10..=100);
        let x: Vec<f64> = (0..n).map(|_| 3.0 * normal(&mut rng) + 1.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.4 * v + normal(&mut rng)).collect();
        let lambda = rng.random_range(0.0..1.5);
        let alpha = rng.random_range(0.0..=1.0);
        let rows: Vec<Vec<f64>> = x.iter().map(|v| vec![*v]).collect();
        let fit = fit_elastic_net(&dataset(&rows, &y), &ElasticNetConfig::new(lambda, alpha)).unwrap();

        let tn = n as f64;
        let (mx, my) = (x.iter().sum::<f64>() / tn, y.iter().sum::<f64>() / tn);
        let sd = (x.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / tn).sqrt();
        let q = x.iter().zip(&y).map(|(a, b)| (a - mx) / sd * (b - my)).sum::<f64>() / tn;
        let t = lambda * alpha / 2.0;
        let shrunk = q.signum() * (q.abs() - t).max(0.0) / (1.0 + lambda * (1.0 - alpha) / 2.0);
        assert!((fit.penalized_coefficients[0] - shrunk).abs() < 1e-12);
        assert!((fit.coefficients[0] - shrunk / sd).abs() < 1e-12);
        assert!((fit.intercept - (my - shrunk / sd * mx)).abs() < 1e-12);
    }
}

#[test]
fn trees_match_brute_force_with_tied_values() {
    let mut rng = rng(12);
    for _ in 0..300 {
        let n = rng.random_range(2..=8);
        let p = rng.random_range(1..=3);
        // Small integer grids create repeated feature values.
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(0..3) as f64).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let k_max = rng.random_range(2..=4);
        let params = TreeParams { m_try: p, min_node_fraction: 0.01, max_terminal_nodes: k_max };
        let all: Vec<usize> = (0..n).collect();
        let tree = fit_tree_on_rows(&dataset(&rows, &y), &all, &params, &mut rng);
        let cost: f64 = rows.iter().zip(&y).map(|(r, v)| (v - tree.predict(r)).powi(2)).sum();
        let oracle = brute_force_tree_sse(&rows, &y, 0.01, k_max);
        assert!((cost - oracle).abs() <= 1e-10 * oracle.max(1.0), "{cost} vs {oracle}");
    }
}

#[test]
fn hc_standard_errors_match_dense_sandwich() {
    let mut rng = rng(13);
    for _ in 0..20 {
        let n = rng.random_range(8..=40);
        let x: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.1 + 0.8 * v + normal(&mut rng) * (0.5 + v.abs())).collect();
        let hc0 = robust_ols(&y, &[("x", x.clone())], CovarianceType::Hc0).unwrap();
        let hc1 = robust_ols(&y, &[("x", x.clone())], CovarianceType::Hc1).unwrap();
        let (beta, se) = dense_hc0(&[x], &y);
        let adj = (n as f64 / (n as f64 - 2.0)).sqrt();
        for j in 0..2 {
            assert!((hc0.coefficients[j] - beta[j]).abs() < 1e-10);
            assert!((hc0.std_errors[j] - se[j]).abs() < 1e-10);
            assert!((hc1.std_errors[j] - se[j] * adj).abs() < 1e-10);
        }
    }
}

#[test]
fn sampled_kernel_shap_is_exact_for_linear_models() {
    // Twelve features force coalition sampling rather than enumeration.
    let mut rng = rng(14);
    let m = 12;
    let beta: Vec<f64> = (0..m).map(|_| normal(&mut rng)).collect();
    let model = |x: &[f64]| 0.5 + beta.iter().zip(x).map(|(b, v)| b * v).sum::<f64>();
    let x: Vec<f64> = (0..m).map(|_| normal(&mut rng)).collect();
    let r: Vec<f64> = (0..m).map(|_| normal(&mut rng)).collect();
    let e = explain(&model, &x, &r, 500, 3).unwrap();
    for (phi, exact) in e.phi.iter().zip(linear_shap(&beta, &x, &r)) {
        assert!((phi - exact).abs() < 1e-9, "{phi} vs {exact}");
    }
}

#[test]
fn enumerated_kernel_shap_matches_shapley_formula_for_nonlinear_models() {
    let mut rng = rng(15);
    for k in 0..20 {
        let m = rng.random_range(2..=6);
        let w: Vec<f64> = (0..m).map(|_| normal(&mut rng)).collect();
        let model = move |x: &[f64]| {
            x.iter().zip(&w).map(|(v, c)| c * v).sum::<f64>() + x[0] * x[1] + (x[m - 1]).sin()
        };
        let x: Vec<f64> = (0..m).map(|_| normal(&mut rng)).collect();
        let r: Vec<f64> = (0..m).map(|_| normal(&mut rng)).collect();
        let e = explain(&model, &x, &r, 1000, k).unwrap();
        let exact = brute_force_shapley(&model, &x, &r);
        for (phi, ex) in e.phi.iter().zip(&exact) {
            assert!((phi - ex).abs() < 1e-9, "{phi} vs {ex}");
        }
    }
}

#[test]
fn tuning_prefers_small_penalty_on_linear_signal() {
    let mut rng = rng(16);
    let panel = random_return_panel(&mut rng, 240, 3);
    let window = EvaluationWindow::new(panel.months()[120], panel.months()[239]).unwrap();
    let grid = TuningGrid {
        candidates: vec![
            LearnerConfig::ElasticNet(ElasticNetConfig::new(1.0, 0.5)),
            LearnerConfig::ElasticNet(ElasticNetConfig::new(0.001, 0.5)),
        ],
        refit_every: 6,
    };
    let results = tune(&panel, &grid, &window, &WalkOptions::default(), &[0], Benchmark::ExpandingMean).unwrap();
    assert_eq!(results.len(), 1);
    assert_eq!(results[0].best_index, 1);
    let again = tune(&panel, &grid, &window, &WalkOptions::default(), &[0], Benchmark::ExpandingMean).unwrap();
    assert_eq!(results, again);
}

#[test]
fn strategy_taxonomy_and_buy_and_hold_identity() {
    let mut rng = rng(17);
    let panel = random_return_panel(&mut rng, 120, 2);
    let window = EvaluationWindow::new(panel.months()[60], panel.last_month()).unwrap();
    let learner = LearnerConfig::ElasticNet(ElasticNetConfig::new(0.01, 0.5));
    let walk = walk_forecast(&panel, &learner, &window, &WalkOptions::default()).unwrap();
    let vol: Vec<f64> = (0..walk.forecasts.len()).map(|i| 0.04 + 0.001 * i as f64).collect();
    let mut fc = ForecastSeries::from_walks("elastic_net", None, Some(&walk), None).unwrap();
    fc.volatility_forecast = Some(vol);

    // "Optimal with previous realized risk" is the Returns strategy.
    let spelled = StrategyId::Timing {
        reward: RewardSource::Model,
        risk: RiskSource::PreviousRealized,
        family: Some(ModelFamily::ElasticNet),
    };
    assert_eq!(spelled, StrategyId::returns(ModelFamily::ElasticNet));
    let bounds = WeightBounds::LEVERED;
    let w = strategy_weights(spelled, &panel, &window, Some(&fc), 4.0, bounds).unwrap();
    for (i, wt) in w.weights.iter().enumerate() {
        let t = 60 + i;
        let expected = optimal_weight(walk.forecasts[i], panel.prev_realized_variances()[t], 4.0, bounds).unwrap();
        assert_eq!(*wt, expected);
    }

    // Buy-and-hold Sharpe equals a direct computation on market excess returns.
    let bh = strategy_weights(StrategyId::BuyHold, &panel, &window, None, 4.0, bounds).unwrap();
    let stats = sharpe(&portfolio_path_on_panel(&bh, &panel).unwrap()).unwrap();
    let direct = sharpe_of_excess(&panel.excess_returns()[60..]).unwrap();
    assert!((stats.sharpe - direct).abs() < 1e-12);
}
