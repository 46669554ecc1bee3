//! Property-based invariants.

mod common;

use proptest::prelude::*;

use rewardrisk::allocation::{optimal_weight, WeightBounds};
use rewardrisk::analytics::{break_even_closed_form, sharpe_of_excess, turnover};
use rewardrisk::learners::{
    fit_elastic_net, fit_ols, fit_tree_on_rows, Dataset, ElasticNetConfig, OlsConfig, TreeParams,
};
use rewardrisk::market_data::{realized_variance, trim_mask};
use rewardrisk::walkforward::{walk_forecast, WalkOptions};
use rewardrisk::market_data::EvaluationWindow;
use rewardrisk::learners::LearnerConfig;
use rewardrisk::MonthStamp;

/// Design with `n` rows, `p` features and a noisy linear target.
fn design(max_p: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (1..=max_p).prop_flat_map(|p| {
        (p + 8..=60).prop_flat_map(move |n| {
            (
                prop::collection::vec(prop::collection::vec(-3.0..3.0f64, p), n),
                prop::collection::vec(-1.0..1.0f64, n),
                prop::collection::vec(-2.0..2.0f64, p),
            )
                .prop_map(|(rows, noise, beta)| {
                    let y = rows
                        .iter()
                        .zip(&noise)
                        .map(|(r, e)| r.iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>() + e)
                        .collect();
                    (rows, y)
                })
        })
    })
}

fn data(rows: &[Vec<f64>], y: &[f64]) -> Dataset {
    Dataset::from_rows(rows, y.to_vec()).unwrap()
}

fn penalty(b: &[f64], alpha: f64) -> f64 {
    alpha * b.iter().map(|v| v.abs()).sum::<f64>() + 0.5 * (1.0 - alpha) * b.iter().map(|v| v * v).sum::<f64>()
}

fn tight(lambda: f64, alpha: f64) -> ElasticNetConfig {
    ElasticNetConfig {
        tolerance: 1e-13,
        max_iterations: 100_000,
        ..ElasticNetConfig::new(lambda, alpha)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn elastic_net_without_penalty_is_least_squares((rows, y) in design(6), alpha in 0.0..=1.0f64) {
        let d = data(&rows, &y);
        let en = fit_elastic_net(&d, &tight(0.0, alpha)).unwrap();
        let ols = fit_ols(&d, &OlsConfig::default()).unwrap();
        prop_assert!((en.intercept - ols.intercept).abs() < 1e-7);
        for (a, b) in en.coefficients.iter().zip(&ols.coefficients) {
            prop_assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn huge_penalty_zeroes_every_coefficient((rows, y) in design(6), alpha in 0.01..=1.0f64) {
        let d = data(&rows, &y);
        let en = fit_elastic_net(&d, &ElasticNetConfig::new(1e8, alpha)).unwrap();
        prop_assert!(en.coefficients.iter().all(|b| b.abs() < 1e-6));
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        prop_assert!((en.intercept - mean).abs() < 1e-6);
    }

    #[test]
    fn objective_never_increases((rows, y) in design(8), lambda in 0.0..0.5f64, alpha in 0.0..=1.0f64) {
        let en = fit_elastic_net(&data(&rows, &y), &ElasticNetConfig::new(lambda, alpha)).unwrap();
        for w in en.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-13 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn penalty_shrinks_as_lambda_grows(
        (rows, y) in design(6),
        l1 in 0.001..0.5f64,
        factor in 1.5..10.0f64,
        alpha in 0.0..=1.0f64,
    ) {
        let d = data(&rows, &y);
        let small = fit_elastic_net(&d, &tight(l1, alpha)).unwrap();
        let large = fit_elastic_net(&d, &tight(l1 * factor, alpha)).unwrap();
        let (ps, pl) = (penalty(&small.penalized_coefficients, alpha), penalty(&large.penalized_coefficients, alpha));
        prop_assert!(pl <= ps + 1e-9 * ps.max(1.0), "{pl} > {ps}");
    }

    #[test]
    fn trees_ignore_positive_affine_feature_maps(
        (rows, y) in design(3),
        scale in 0.01..100.0f64,
        shift in -50.0..50.0f64,
        k_max in 2usize..8,
    ) {
        let p = rows[0].len();
        let params = TreeParams { m_try: p, min_node_fraction: 0.05, max_terminal_nodes: k_max };
        let all: Vec<usize> = (0..rows.len()).collect();
        let moved: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * scale + shift).collect()).collect();
        let a = fit_tree_on_rows(&data(&rows, &y), &all, &params, &mut common::rng(1));
        let b = fit_tree_on_rows(&data(&moved, &y), &all, &params, &mut common::rng(1));
        prop_assert_eq!(a.n_leaves(), b.n_leaves());
        for (r, m) in rows.iter().zip(&moved) {
            prop_assert_eq!(a.predict(r), b.predict(m));
        }
    }

    #[test]
    fn tree_never_exceeds_leaf_cap((rows, y) in design(3), k_max in 2usize..10, s_min in 0.01..1.0f64) {
        let params = TreeParams { m_try: rows[0].len(), min_node_fraction: s_min, max_terminal_nodes: k_max };
        let all: Vec<usize> = (0..rows.len()).collect();
        let t = fit_tree_on_rows(&data(&rows, &y), &all, &params, &mut common::rng(2));
        prop_assert!(t.n_leaves() <= k_max);
        prop_assert_eq!(t.splits().len(), t.n_leaves() - 1);
    }

    #[test]
    fn optimal_weight_respects_bounds_and_monotone_in_reward(
        r1 in -0.1..0.1f64,
        dr in 0.0..0.1f64,
        v in 1e-5..0.05f64,
        gamma in 0.5..20.0f64,
        high in 0.1..3.0f64,
    ) {
        let bounds = WeightBounds { low: 0.0, high };
        let a = optimal_weight(r1, v, gamma, bounds).unwrap();
        let b = optimal_weight(r1 + dr, v, gamma, bounds).unwrap();
        prop_assert!((0.0..=high).contains(&a));
        prop_assert!(a <= b);
    }

    #[test]
    fn realized_variance_is_shift_invariant(
        days in prop::collection::vec(-0.05..0.05f64, 10..25),
        shift in -0.01..0.01f64,
    ) {
        let base = realized_variance(&days).unwrap();
        let moved: Vec<f64> = days.iter().map(|d| d + shift).collect();
        let shifted = realized_variance(&moved).unwrap();
        prop_assert!(base >= 0.0);
        prop_assert!((base - shifted).abs() <= 1e-12 * base.max(1e-6));
    }

    #[test]
    fn sharpe_is_scale_invariant(x in prop::collection::vec(-0.1..0.1f64, 12..60), k in 0.1..10.0f64) {
        let scaled: Vec<f64> = x.iter().map(|v| v * k).collect();
        if let (Ok(a), Ok(b)) = (sharpe_of_excess(&x), sharpe_of_excess(&scaled)) {
            prop_assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn turnover_is_absolute_weight_change(w in prop::collection::vec(0.0..1.5f64, 1..40), alpha in 0.001..0.1f64) {
        let t = turnover(&w);
        prop_assert_eq!(t.len(), w.len() - 1);
        for (i, v) in t.iter().enumerate() {
            prop_assert_eq!(*v, (w[i + 1] - w[i]).abs());
        }
        let mean = t.iter().sum::<f64>() / t.len().max(1) as f64;
        match break_even_closed_form(alpha, mean) {
            Some(be) => prop_assert!((be * 12.0 * mean - alpha).abs() < 1e-15),
            None => prop_assert!(mean == 0.0),
        }
    }

    #[test]
    fn trim_keeps_at_least_the_quantile_share(r in prop::collection::vec(-0.3..0.3f64, 5..200), q in 0.5..0.99f64) {
        let keep = trim_mask(&r, q).unwrap();
        let kept = keep.iter().filter(|k| **k).count();
        prop_assert!(kept as f64 >= (q * r.len() as f64).floor());
        let max_kept = r.iter().zip(&keep).filter(|(_, k)| **k).map(|(v, _)| v.abs()).fold(0.0, f64::max);
        let min_dropped = r.iter().zip(&keep).filter(|(_, k)| !**k).map(|(v, _)| v.abs()).fold(f64::INFINITY, f64::min);
        prop_assert!(max_kept <= min_dropped);
    }

    #[test]
    fn month_ordinals_round_trip(ordinal in 0i64..40_000) {
        let m = MonthStamp::from_ordinal(ordinal);
        prop_assert_eq!(m.ordinal(), ordinal);
        prop_assert_eq!(m.to_string().parse::<MonthStamp>().unwrap(), m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Changing any data from month `cut` onward leaves every forecast made
    /// before `cut` bit-for-bit unchanged.
    #[test]
    fn walk_forward_has_no_lookahead(seed in 0u64..1000, cut_offset in 0usize..30) {
        let mut rng = common::rng(seed);
        let panel = common::random_return_panel(&mut rng, 70, 3);
        let window = EvaluationWindow::new(panel.months()[40], panel.last_month()).unwrap();
        let cut = 40 + cut_offset.min(28);
        let truncated = panel.slice(0, cut + 1);
        let learner = LearnerConfig::ElasticNet(ElasticNetConfig::new(0.01, 0.5));
        let opts = WalkOptions { trim: Some(0.9), ..WalkOptions::default() };
        let full = walk_forecast(&panel, &learner, &window, &opts).unwrap();
        let short_window = EvaluationWindow::new(panel.months()[40], panel.months()[cut]).unwrap();
        let short = walk_forecast(&truncated, &learner, &short_window, &opts).unwrap();
        prop_assert_eq!(&full.forecasts[..short.forecasts.len()], &short.forecasts[..]);
        prop_assert!(full.cutoffs.iter().zip(&full.months).all(|(c, m)| c < m));
    }
}
