//! Independent reference implementations used by the integration and
//! acceptance tests. Each oracle is deliberately naive: direct enumeration,
//! dense Gauss-Jordan algebra, and closed forms.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rewardrisk::allocation::{strategy_weights, StrategyId, WeightBounds};
use rewardrisk::analytics::{portfolio_path_on_panel, sharpe};
use rewardrisk::learners::{Dataset, ElasticNetConfig, LearnerConfig, ModelFamily};
use rewardrisk::market_data::{
    build_panel, EvaluationWindow, FeatureSet, PanelOutcome, PredictorPanel,
};
use rewardrisk::simulate::{simulate, SimulationConfig};
use rewardrisk::walkforward::{walk_forecast, ForecastSeries, WalkOptions};
use rewardrisk::MonthStamp;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Row-major design with standard normal features.
pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..p).map(|_| normal(rng)).collect()).collect()
}

pub fn dataset(rows: &[Vec<f64>], y: &[f64]) -> Dataset {
    Dataset::from_rows(rows, y.to_vec()).unwrap()
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        let d = m[col][col];
        assert!(d.abs() > 1e-300, "singular matrix in oracle");
        for v in &mut m[col] {
            *v /= d;
        }
        for i in 0..n {
            if i != col {
                let f = m[i][col];
                if f != 0.0 {
                    for j in 0..2 * n {
                        m[i][j] -= f * m[col][j];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

fn with_intercept(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| {
            let mut v = vec![1.0];
            v.extend(r);
            v
        })
        .collect()
}

fn gram(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = x[0].len();
    (0..k)
        .map(|a| (0..k).map(|b| x.iter().map(|r| r[a] * r[b]).sum()).collect())
        .collect()
}

fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// Least squares with intercept via the normal equations:
/// `[intercept, slopes...]`.
pub fn normal_equation_ols(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let x = with_intercept(rows);
    let k = x[0].len();
    let xty: Vec<f64> = (0..k).map(|a| x.iter().zip(y).map(|(r, v)| r[a] * v).sum()).collect();
    mat_vec(&invert(&gram(&x)), &xty)
}

/// Coefficients and HC0 standard errors with a dense sandwich.
pub fn dense_hc0(regressors: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| regressors.iter().map(|c| c[i]).collect()).collect();
    let beta = normal_equation_ols(&rows, y);
    let x = with_intercept(&rows);
    let k = beta.len();
    let inv = invert(&gram(&x));
    let mut meat = vec![vec![0.0; k]; k];
    for (r, yi) in x.iter().zip(y) {
        let e = yi - r.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
        for a in 0..k {
            for b in 0..k {
                meat[a][b] += r[a] * r[b] * e * e;
            }
        }
    }
    let mut se = Vec::with_capacity(k);
    for j in 0..k {
        let mut v = 0.0;
        for a in 0..k {
            for b in 0..k {
                v += inv[j][a] * meat[a][b] * inv[b][j];
            }
        }
        se.push(v.sqrt());
    }
    (beta, se)
}

fn sse(y: &[f64], rows: &[usize]) -> f64 {
    let m = rows.iter().map(|&i| y[i]).sum::<f64>() / rows.len() as f64;
    rows.iter().map(|&i| (y[i] - m).powi(2)).sum()
}

/// Best-first growth where every expansion enumerates every feature and
/// every midpoint threshold of every eligible leaf, recomputing child costs
/// from scratch. Returns the training sum of squared errors.
pub fn brute_force_tree_sse(x: &[Vec<f64>], y: &[f64], s_min: f64, k_max: usize) -> f64 {
    let n = y.len();
    let p = x[0].len();
    let mut leaves: Vec<Vec<usize>> = vec![(0..n).collect()];
    while leaves.len() < k_max {
        let mut best: Option<(f64, usize, Vec<usize>, Vec<usize>)> = None;
        for (li, rows) in leaves.iter().enumerate() {
            if rows.len() < 2 || (rows.len() as f64) < s_min * n as f64 {
                continue;
            }
            let parent = sse(y, rows);
            for j in 0..p {
                let mut vals: Vec<f64> = rows.iter().map(|&i| x[i][j]).collect();
                vals.sort_by(f64::total_cmp);
                vals.dedup();
                for w in vals.windows(2) {
                    let t = 0.5 * (w[0] + w[1]);
                    let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i][j] <= t);
                    let gain = parent - sse(y, &l) - sse(y, &r);
                    if gain > parent * 1e-12 && best.as_ref().is_none_or(|b| gain > b.0) {
                        best = Some((gain, li, l, r));
                    }
                }
            }
        }
        let Some((_, li, l, r)) = best else { break };
        leaves.swap_remove(li);
        leaves.push(l);
        leaves.push(r);
    }
    leaves.iter().map(|rows| sse(y, rows)).sum()
}

/// Exact Shapley values of `f(x) = b0 + β·x` against a reference point.
pub fn linear_shap(beta: &[f64], x: &[f64], reference: &[f64]) -> Vec<f64> {
    beta.iter().zip(x.iter().zip(reference)).map(|(b, (xi, ri))| b * (xi - ri)).collect()
}

/// A return panel with Gaussian features and returns, for walk-forward
/// tests.
pub fn random_return_panel(rng: &mut ChaCha8Rng, n: usize, p: usize) -> PredictorPanel {
    let start = MonthStamp::new(1950, 1).unwrap();
    let months = (0..n).map(|i| MonthStamp::from_ordinal(start.ordinal() + i as i64)).collect();
    let features: Vec<f64> = (0..n * p).map(|_| normal(rng)).collect();
    let outcomes = (0..n)
        .map(|i| PanelOutcome {
            market_return: 0.005 + 0.01 * features[i * p] + 0.04 * normal(rng),
            riskfree: 0.003,
            realized_variance: 0.002 * (1.0 + 0.5 * normal(rng).abs()),
            prev_realized_variance: 0.002,
        })
        .collect();
    PredictorPanel::from_parts(
        FeatureSet::ReturnModel,
        months,
        (0..p).map(|j| format!("x{j}")).collect(),
        features,
        outcomes,
    )
    .unwrap()
}

/// Sharpe ratios `(optimal, buy_and_hold)` of the elastic-net Optimal
/// strategy on one simulated market of 1000 months.
pub fn synthetic_optimal_vs_market(seed: u64) -> (f64, f64) {
    let market = simulate(&SimulationConfig {
        months: 1000,
        seed,
        ..SimulationConfig::default()
    })
    .unwrap();
    let ret = build_panel(&market.series, &market.daily, FeatureSet::ReturnModel).unwrap();
    let vol = build_panel(&market.series, &market.daily, FeatureSet::VolatilityModel).unwrap();
    let window = EvaluationWindow::new(ret.months()[300], ret.last_month()).unwrap();
    let opts = WalkOptions::default();
    let r = walk_forecast(&ret, &LearnerConfig::ElasticNet(ElasticNetConfig::new(0.005, 0.5)), &window, &opts)
        .unwrap();
    let v = walk_forecast(&vol, &LearnerConfig::ElasticNet(ElasticNetConfig::new(0.002, 0.5)), &window, &opts)
        .unwrap();
    let fc = ForecastSeries::from_walks("elastic_net", None, Some(&r), Some(&v)).unwrap();
    let run = |id| {
        let w = strategy_weights(id, &ret, &window, Some(&fc), 4.0, WeightBounds::LEVERED).unwrap();
        sharpe(&portfolio_path_on_panel(&w, &ret).unwrap()).unwrap().sharpe
    };
    (run(StrategyId::optimal(ModelFamily::ElasticNet)), run(StrategyId::BuyHold))
}

/// Exact Shapley values by enumerating every coalition, with absent
/// features set to the reference point.
pub fn brute_force_shapley(f: &dyn Fn(&[f64]) -> f64, x: &[f64], reference: &[f64]) -> Vec<f64> {
    let m = x.len();
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    let eval = |mask: usize| {
        let z: Vec<f64> = (0..m).map(|j| if mask >> j & 1 == 1 { x[j] } else { reference[j] }).collect();
        f(&z)
    };
    (0..m)
        .map(|j| {
            (0..1usize << m)
                .filter(|s| s >> j & 1 == 0)
                .map(|s| {
                    let size = s.count_ones() as usize;
                    let w = fact(size) * fact(m - size - 1) / fact(m);
                    w * (eval(s | 1 << j) - eval(s))
                })
                .sum()
        })
        .collect()
}
