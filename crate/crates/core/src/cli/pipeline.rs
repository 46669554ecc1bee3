//! The subcommands, as library functions returning their artifacts.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{FamilyModels, RunConfig};
use super::report::{BacktestReport, Metrics, Provenance, Table};
use crate::allocation::{
    base_weights, strategy_weights, vol_timing_constant_weights, StrategyId,
    WeightBounds, WeightSeries,
};
use crate::analytics::{
    alpha_regression, drawdown, hm_test, portfolio_path_on_panel, sharpe, tm_test,
    transaction_cost_table, utility_metrics, PortfolioPath,
};
use crate::error::{Error, Result};
use crate::explain::{feature_means, mean_attributions, write_attributions_csv, AttributionSummary};
use crate::learners::{LearnerConfig, ModelFamily};
use crate::market_data::{
    build_panel, load_daily, load_monthly, trim_mask, EvaluationWindow, FeatureSet, PredictorPanel,
};
use crate::month::MonthStamp;
use crate::simulate::{simulate, SimulationConfig};
use crate::walkforward::{
    accuracy_report, tune, window_rows, write_forecasts_csv, ForecastSeries, TuningGrid,
    TuningResult, WalkOptions,
};

const RETURN_PANEL: &str = "return_panel.csv";
const VOLATILITY_PANEL: &str = "volatility_panel.csv";

fn dir(config: &RunConfig, name: &str) -> Result<PathBuf> {
    let d = config.output_dir.join(name);
    std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    Ok(d)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        file: path.display().to_string(),
        line: e.line() as u64,
        message: e.to_string(),
    })
}

/// Runs `f` on a pool of `config.threads` workers, or the global pool.
pub fn with_threads<T: Send>(config: &RunConfig, f: impl FnOnce() -> T + Send) -> Result<T> {
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Config(format!("thread pool: {e}"))),
        None => Ok(f()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSummary {
    pub file: String,
    pub rows: usize,
    pub first: MonthStamp,
    pub last: MonthStamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestManifest {
    pub config_hash: String,
    pub return_panel: PanelSummary,
    pub volatility_panel: PanelSummary,
}

/// Loads the raw files, builds both predictor panels and persists them.
pub fn cmd_ingest(config: &RunConfig) -> Result<IngestManifest> {
    let monthly = config
        .data
        .monthly
        .as_ref()
        .ok_or_else(|| Error::Config("data.monthly is required for ingest".into()))?;
    let daily = config
        .data
        .daily
        .as_ref()
        .ok_or_else(|| Error::Config("data.daily is required for ingest".into()))?;
    let series = load_monthly(monthly, &config.data.monthly_schema)?;
    let daily = load_daily(daily, &config.data.daily_schema)?;
    let out = dir(config, "panels")?;
    let mut summaries = Vec::new();
    for (fs, file) in [
        (FeatureSet::ReturnModel, RETURN_PANEL),
        (FeatureSet::VolatilityModel, VOLATILITY_PANEL),
    ] {
        let panel = build_panel(&series, &daily, fs)?;
        config.split.check_against(&panel)?;
        panel.write_csv(out.join(file))?;
        log::info!("{} panel: {} rows {}..{}", fs.as_str(), panel.len(), panel.first_month(), panel.last_month());
        summaries.push(PanelSummary {
            file: file.into(),
            rows: panel.len(),
            first: panel.first_month(),
            last: panel.last_month(),
        });
    }
    let volatility_panel = summaries.pop().expect("two panels");
    let return_panel = summaries.pop().expect("two panels");
    let manifest = IngestManifest {
        config_hash: config.hash(),
        return_panel,
        volatility_panel,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Reads the persisted return and volatility panels.
pub fn load_panels(config: &RunConfig) -> Result<(PredictorPanel, PredictorPanel)> {
    let base = config.output_dir.join("panels");
    let read = |file: &str| {
        let path = base.join(file);
        if !path.exists() {
            return Err(Error::Lookup(format!(
                "panel {} not found; run `ingest` first",
                path.display()
            )));
        }
        PredictorPanel::read_csv(path)
    };
    let ret = read(RETURN_PANEL)?;
    let vol = read(VOLATILITY_PANEL)?;
    if ret.months() != vol.months() {
        return Err(Error::Alignment("return and volatility panels cover different months".into()));
    }
    config.split.check_against(&ret)?;
    Ok((ret, vol))
}

fn return_options(config: &RunConfig, refit_every: usize) -> WalkOptions {
    WalkOptions {
        trim: (config.trim_quantile < 1.0).then_some(config.trim_quantile),
        refit_every,
        log_target: false,
    }
}

fn volatility_options(config: &RunConfig, refit_every: usize) -> WalkOptions {
    WalkOptions {
        trim: None,
        refit_every,
        log_target: config.log_volatility_target,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedModels {
    pub config_hash: String,
    pub returns: Vec<TuningResult>,
    pub volatility: Vec<TuningResult>,
}

/// Scores the tuning grids over the validation window.
pub fn cmd_tune(config: &RunConfig) -> Result<TunedModels> {
    let (ret, vol) = load_panels(config)?;
    let window = config.split.validation_window();
    let seeds = config.seeds.seeds();
    let grid = |candidates: &[LearnerConfig]| TuningGrid {
        candidates: candidates.to_vec(),
        refit_every: config.tuning.refit_every,
    };
    let returns = tune(
        &ret,
        &grid(&config.tuning.return_grid),
        &window,
        &return_options(config, config.tuning.refit_every),
        &seeds,
        config.benchmark,
    )?;
    let volatility = tune(
        &vol,
        &grid(&config.tuning.volatility_grid),
        &window,
        &volatility_options(config, config.tuning.refit_every),
        &seeds,
        config.benchmark,
    )?;
    let tuned = TunedModels {
        config_hash: config.hash(),
        returns,
        volatility,
    };
    let out = dir(config, "tuning")?;
    write_json(&out.join("tuned.json"), &tuned)?;

    let provenance = Provenance {
        config_hash: tuned.config_hash.clone(),
        seeds,
        data_start: ret.first_month(),
        data_end: ret.last_month(),
        window_start: window.start,
        window_end: window.end,
    };
    let mut table = Table::new("tuning", &provenance);
    for (target, results) in [("return", &tuned.returns), ("volatility", &tuned.volatility)] {
        for r in results {
            for s in &r.scores {
                let mut m = Metrics::default();
                m.push("r_squared", s.r_squared.unwrap_or(f64::NAN));
                m.push("selected", (s.index == r.best_index) as u8 as f64);
                table.push(
                    &[
                        ("target", target.to_string()),
                        ("family", r.family.as_str().to_string()),
                        ("candidate", s.index.to_string()),
                    ],
                    m,
                );
            }
        }
    }
    table.write_csv(out.join("scores.csv"))?;
    Ok(tuned)
}

/// Configured families, with tuned selections substituted when available.
pub fn final_families(config: &RunConfig) -> Result<Vec<FamilyModels>> {
    let mut families = config.models.families.clone();
    let path = config.output_dir.join("tuning").join("tuned.json");
    if !config.models.use_tuned || !path.exists() {
        return Ok(families);
    }
    let tuned: TunedModels = read_json(&path)?;
    if tuned.config_hash != config.hash() {
        log::warn!("tuned models come from a different configuration ({})", tuned.config_hash);
    }
    for f in &mut families {
        if let Some(r) = tuned.returns.iter().find(|r| r.family == f.family()) {
            f.return_model = r.best.clone();
        }
        if let Some(r) = tuned.volatility.iter().find(|r| r.family == f.family()) {
            f.volatility_model = r.best.clone();
        }
    }
    Ok(families)
}

fn seed_tag(seed: Option<u64>) -> String {
    seed.map_or_else(String::new, |s| s.to_string())
}

fn bounds_tag(b: &WeightBounds) -> String {
    b.high.to_string()
}

/// Metric, or NaN with a warning when it is undefined for this strategy.
fn or_nan(what: &str, who: &str, value: Result<f64>) -> f64 {
    value.unwrap_or_else(|e| {
        log::warn!("{what} for {who}: {e}");
        f64::NAN
    })
}

struct StrategyRun {
    weights: WeightSeries,
    seed: Option<u64>,
    seeded: bool,
    path: PortfolioPath,
}

/// Walk-forward forecasts for every family and seed, then every strategy
/// under every risk aversion and weight bound, with all evaluation tables.
pub fn cmd_backtest(config: &RunConfig) -> Result<BacktestReport> {
    let (ret, vol) = load_panels(config)?;
    let window = config.split.test_window();
    let seeds = config.seeds.seeds();
    let families = final_families(config)?;
    let provenance = Provenance {
        config_hash: config.hash(),
        seeds: seeds.clone(),
        data_start: ret.first_month(),
        data_end: ret.last_month(),
        window_start: window.start,
        window_end: window.end,
    };
    let (start, end) = window_rows(&ret, &window)?;
    let ropts = return_options(config, config.refit_every);
    let vopts = volatility_options(config, config.refit_every);

    // Forecasts, one job per (family, seed).
    let jobs: Vec<(&FamilyModels, Option<u64>)> = families
        .iter()
        .flat_map(|f| {
            let seeded = f.return_model.is_seeded() || f.volatility_model.is_seeded();
            let runs: Vec<Option<u64>> = if seeded {
                seeds.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            runs.into_iter().map(move |s| (f, s))
        })
        .collect();
    let forecasts: Vec<ForecastSeries> = jobs
        .par_iter()
        .map(|(f, seed)| {
            let with = |c: &LearnerConfig| seed.map_or_else(|| c.clone(), |s| c.with_seed(s));
            log::info!("forecasting {} seed {:?}", f.family().as_str(), seed);
            let r = crate::walkforward::walk_forecast(&ret, &with(&f.return_model), &window, &ropts)?;
            let v = crate::walkforward::walk_forecast(&vol, &with(&f.volatility_model), &window, &vopts)?;
            ForecastSeries::from_walks(f.family().as_str(), *seed, Some(&r), Some(&v))
        })
        .collect::<Result<_>>()?;
    let baseline_ret = crate::walkforward::walk_forecast(&ret, &LearnerConfig::PrevailingMean, &window, &ropts)?;
    let baseline_vol = crate::walkforward::walk_forecast(
        &vol,
        &LearnerConfig::PreviousVolatility(config.models.volatility_baseline.clone()),
        &window,
        &WalkOptions {
            log_target: false,
            ..vopts.clone()
        },
    )?;
    let mut all_forecasts = vec![
        ForecastSeries::from_walks(ModelFamily::PrevailingMean.as_str(), None, Some(&baseline_ret), None)?,
        ForecastSeries::from_walks(ModelFamily::PreviousVolatility.as_str(), None, None, Some(&baseline_vol))?,
    ];
    all_forecasts.extend(forecasts.iter().cloned());

    let out = dir(config, "backtest")?;
    write_forecasts_csv(out.join("forecasts.csv"), &all_forecasts)?;

    // Accuracy.
    let mut accuracy = Table::new("accuracy", &provenance);
    let seeded_of = |model: &str| {
        families
            .iter()
            .find(|f| f.family().as_str() == model)
            .is_some_and(|f| f.return_model.is_seeded() || f.volatility_model.is_seeded())
    };
    let mut acc_rows: Vec<(String, &str, Option<u64>, Metrics)> = Vec::new();
    for fc in &all_forecasts {
        for (target, panel, values) in [
            ("return", &ret, fc.return_forecast.as_ref()),
            ("volatility", &vol, fc.volatility_forecast.as_ref()),
        ] {
            let Some(values) = values else { continue };
            let rep = accuracy_report(panel, &window, values, config.benchmark)?;
            let mut m = Metrics::default();
            m.push("r_squared_oos", rep.r_squared_oos);
            m.push("directional_accuracy", rep.directional_accuracy);
            m.push("n_forecasts", rep.n_forecasts as f64);
            acc_rows.push((fc.model.clone(), target, fc.seed, m));
        }
    }
    push_with_means(
        &mut accuracy,
        acc_rows.into_iter().map(|(model, target, seed, m)| {
            let seeded = seeded_of(&model);
            (vec![("model", model), ("target", target.to_string())], seed, seeded, m)
        }),
    );

    // Strategies.
    let market_excess: Vec<f64> = ret.excess_returns()[start..end].to_vec();
    let scenarios: Vec<(f64, WeightBounds)> = config
        .gammas
        .iter()
        .flat_map(|&g| config.bounds.iter().map(move |&b| (g, b)))
        .collect();
    let mut performance = Table::new("performance", &provenance);
    let mut utility = Table::new("utility", &provenance);
    let mut alphas = Table::new("alpha", &provenance);
    let mut timing = Table::new("timing", &provenance);
    let mut costs = Table::new("transaction_costs", &provenance);
    let mut path_rows = Vec::new();
    for &(gamma, bounds) in &scenarios {
        let mut runs: Vec<StrategyRun> = Vec::new();
        for id in [StrategyId::BuyHold, StrategyId::BASE] {
            let w = strategy_weights(id, &ret, &window, None, gamma, bounds)?;
            let path = portfolio_path_on_panel(&w, &ret)?;
            runs.push(StrategyRun { weights: w, seed: None, seeded: false, path });
        }
        for fc in &forecasts {
            let family = ModelFamily::parse(&fc.model).expect("family names round-trip");
            let seeded = seeded_of(&fc.model);
            for id in [
                StrategyId::optimal(family),
                StrategyId::returns(family),
                StrategyId::volatility(family),
            ] {
                let w = strategy_weights(id, &ret, &window, Some(fc), gamma, bounds)?;
                let path = portfolio_path_on_panel(&w, &ret)?;
                runs.push(StrategyRun { weights: w, seed: fc.seed, seeded, path });
            }
        }

        let mut perf_rows = Vec::new();
        let mut util_rows = Vec::new();
        let mut alpha_rows = Vec::new();
        let mut timing_rows = Vec::new();
        let mut cost_rows = Vec::new();
        for run in &runs {
            let id = run.weights.strategy;
            let who = format!("{id} seed {:?} gamma {gamma} cap {}", run.seed, bounds.high);
            let labels = vec![
                ("strategy", id.to_string()),
                ("label", id.label()),
                ("gamma", gamma.to_string()),
                ("cap", bounds_tag(&bounds)),
            ];

            let dd = drawdown(&run.path)?;
            for (i, m) in run.path.months.iter().enumerate() {
                path_rows.push(format!(
                    "{m},{id},{gamma},{},{},{},{},{},{}",
                    bounds.high,
                    seed_tag(run.seed),
                    run.path.weights[i],
                    run.path.strategy_return[i],
                    run.path.wealth[i],
                    dd.series[i]
                ));
            }

            let mut m = Metrics::default();
            match sharpe(&run.path) {
                Ok(s) => {
                    m.push("annual_return", s.annual_return);
                    m.push("annual_std", s.annual_std);
                    m.push("sharpe", s.sharpe);
                }
                Err(e) => {
                    log::warn!("performance for {who}: {e}");
                    m.push("annual_return", 12.0 * crate::learners::mean(&run.path.strategy_return));
                    m.push("annual_std", f64::NAN);
                    m.push("sharpe", f64::NAN);
                }
            }
            m.push("max_drawdown", dd.max_drawdown);
            m.push("terminal_wealth", run.path.terminal_wealth());
            perf_rows.push((labels.clone(), run.seed, run.seeded, m));

            let mut m = Metrics::default();
            let u = utility_metrics(&run.path, gamma, config.ce_annualization);
            m.push("mean_monthly_utility", or_nan("utility", &who, u.as_ref().map(|u| u.mean_monthly_utility).map_err(clone_err)));
            m.push("ce_annual", or_nan("utility", &who, u.as_ref().map(|u| u.ce_annual).map_err(clone_err)));
            m.push("terminal_wealth", run.path.terminal_wealth());
            util_rows.push((labels.clone(), run.seed, run.seeded, m));

            if id == StrategyId::BuyHold {
                continue;
            }
            let excess = run.path.excess_returns();
            let mut m = Metrics::default();
            match alpha_regression(&excess, &market_excess, config.covariance) {
                Ok(fit) => {
                    m.push("alpha_annual", fit.alpha_annual());
                    m.push("alpha_se_annual", fit.alpha_se_annual());
                    m.push("alpha_t", fit.t_stats[0]);
                    m.push("beta", fit.beta());
                    m.push("beta_se", fit.std_errors[1]);
                    m.push("r_squared", fit.r_squared);
                    m.push("n_obs", fit.n_obs as f64);
                }
                Err(e) => {
                    log::warn!("alpha for {who}: {e}");
                    for k in ["alpha_annual", "alpha_se_annual", "alpha_t", "beta", "beta_se", "r_squared", "n_obs"] {
                        m.push(k, f64::NAN);
                    }
                }
            }
            alpha_rows.push((labels.clone(), run.seed, run.seeded, m));

            let mut m = Metrics::default();
            for (prefix, fit) in [
                ("hm", hm_test(&excess, &market_excess, config.covariance)),
                ("tm", tm_test(&excess, &market_excess, config.covariance)),
            ] {
                let (g, t) = match fit {
                    Ok(f) => (f.gamma().unwrap_or(f64::NAN), f.gamma_t().unwrap_or(f64::NAN)),
                    Err(e) => {
                        log::warn!("{prefix} test for {who}: {e}");
                        (f64::NAN, f64::NAN)
                    }
                };
                m.push(&format!("{prefix}_gamma"), g);
                m.push(&format!("{prefix}_t"), t);
            }
            timing_rows.push((labels.clone(), run.seed, run.seeded, m));

            match transaction_cost_table(&run.path, &market_excess, &config.cost_bps, config.covariance) {
                Ok(rows) => {
                    for r in rows {
                        let mut labels = labels.clone();
                        labels.push(("cost_bps", r.cost_bps.to_string()));
                        let mut m = Metrics::default();
                        m.push("mean_turnover", r.mean_turnover);
                        m.push("gross_annual_return", r.gross_annual_return);
                        m.push("alpha_pre_annual", r.alpha_pre_annual);
                        m.push("alpha_post_annual", r.alpha_post_annual);
                        m.push("break_even_bps", r.break_even_bps.unwrap_or(f64::INFINITY));
                        cost_rows.push((labels, run.seed, run.seeded, m));
                    }
                }
                Err(e) => log::warn!("transaction costs for {who}: {e}"),
            }
        }
        push_with_means(&mut performance, perf_rows);
        push_with_means(&mut utility, util_rows);
        push_with_means(&mut alphas, alpha_rows);
        push_with_means(&mut timing, timing_rows);
        push_with_means(&mut costs, cost_rows);

        write_tagged_weights(&out.join(format!("weights_g{gamma}_cap{}.csv", bounds.high)), &runs)?;
    }

    let fig1 = fig1_table(config, &ret, &window, &provenance, &out)?;

    let paths_file = out.join("paths.csv");
    let mut text = String::from("date,strategy,gamma,cap,seed,weight,return,wealth,drawdown\n");
    for row in path_rows {
        text.push_str(&row);
        text.push('\n');
    }
    std::fs::write(&paths_file, text).map_err(|e| Error::io(&paths_file, e))?;

    let report = BacktestReport {
        provenance,
        tables: vec![accuracy, performance, utility, alphas, timing, costs, fig1],
    };
    for t in &report.tables {
        t.write_csv(out.join(format!("{}.csv", t.name)))?;
    }
    report.write_json(out.join("report.json"))?;
    Ok(report)
}

fn clone_err(e: &Error) -> Error {
    Error::Undefined(e.to_string())
}

/// Writes `date,strategy,weight`; seeded runs are keyed `strategy@seed`.
fn write_tagged_weights(path: &Path, runs: &[StrategyRun]) -> Result<()> {
    use std::io::Write;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "date,strategy,weight").map_err(io)?;
    for run in runs {
        let s = &run.weights;
        let key = if run.seeded {
            format!("{}@{}", s.strategy, seed_tag(run.seed))
        } else {
            s.strategy.to_string()
        };
        for (m, w) in s.months.iter().zip(&s.weights) {
            writeln!(out, "{m},{key},{w}").map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

type Labels = Vec<(&'static str, String)>;
type LabelledRow = (Labels, Option<u64>, bool, Metrics);

/// Appends rows with a `seed` label; for seeded groups, also appends a
/// `mean` row averaging every metric over the seeds.
fn push_with_means(table: &mut Table, rows: impl IntoIterator<Item = LabelledRow>) {
    let mut groups: Vec<(Labels, Vec<Metrics>)> = Vec::new();
    for (labels, seed, seeded, m) in rows {
        let mut full = labels.clone();
        full.push(("seed", seed_tag(seed)));
        table.push(&full, m.clone());
        if seeded {
            match groups.iter_mut().find(|(l, _)| *l == labels) {
                Some((_, ms)) => ms.push(m),
                None => groups.push((labels, vec![m])),
            }
        }
    }
    for (mut labels, ms) in groups {
        let mut mean = Metrics::default();
        for (i, (name, _)) in ms[0].0.iter().enumerate() {
            let v = ms.iter().map(|m| m.0[i].1).sum::<f64>() / ms.len() as f64;
            mean.push(name, v);
        }
        labels.push(("seed", "mean".into()));
        table.push(&labels, mean);
    }
}

/// Base weights against the volatility-timing reference scaled to the
/// buy-and-hold volatility, both unconstrained.
fn fig1_table(
    config: &RunConfig,
    panel: &PredictorPanel,
    window: &EvaluationWindow,
    provenance: &Provenance,
    out: &Path,
) -> Result<Table> {
    let (start, end) = window_rows(panel, window)?;
    let target = crate::allocation::sample_std(&panel.market_returns()[start..end]);
    let base = base_weights(panel, window, config.fig1_gamma, WeightBounds::UNBOUNDED)?;
    let (timing, c) = vol_timing_constant_weights(panel, window, target, WeightBounds::UNBOUNDED)?;
    let diffs: Vec<f64> = base.weights.iter().zip(&timing.weights).map(|(b, t)| t - b).collect();
    let path = out.join("fig1_weights.csv");
    let mut text = String::from("date,base_weight,vol_timing_weight,difference\n");
    for (i, m) in base.months.iter().enumerate() {
        text.push_str(&format!("{m},{},{},{}\n", base.weights[i], timing.weights[i], diffs[i]));
    }
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;

    let mut table = Table::new("fig1", provenance);
    let mut m = Metrics::default();
    m.push("timing_constant", c);
    m.push("target_std", target);
    m.push("max_abs_difference", diffs.iter().fold(0.0, |a, d| a.max(d.abs())));
    m.push(
        "share_within_10pct",
        diffs.iter().filter(|d| d.abs() <= 0.1).count() as f64 / diffs.len() as f64,
    );
    table.push(&[("gamma", config.fig1_gamma.to_string())], m);
    Ok(table)
}

/// Parses `family:target`, e.g. `forest:return` or `elastic_net:volatility`.
fn parse_model_ref(text: &str) -> Result<(ModelFamily, FeatureSet)> {
    let bad = || Error::Lookup(format!("unknown model reference \"{text}\"; expected family:return or family:volatility"));
    let (family, target) = text.split_once(':').ok_or_else(bad)?;
    let family = ModelFamily::parse(family).ok_or_else(bad)?;
    let target = match target {
        "return" => FeatureSet::ReturnModel,
        "volatility" => FeatureSet::VolatilityModel,
        _ => return Err(bad()),
    };
    Ok((family, target))
}

/// Fits the referenced model on all rows before the window and averages
/// Kernel SHAP values over the window's rows.
pub fn cmd_explain(
    config: &RunConfig,
    model_ref: &str,
    from: Option<MonthStamp>,
    to: Option<MonthStamp>,
) -> Result<AttributionSummary> {
    let (family, target) = parse_model_ref(model_ref)?;
    let (ret, vol) = load_panels(config)?;
    let panel = match target {
        FeatureSet::ReturnModel => &ret,
        FeatureSet::VolatilityModel => &vol,
    };
    let test = config.split.test_window();
    let window = EvaluationWindow::new(from.unwrap_or(test.start), to.unwrap_or(test.end))?;
    let (start, end) = window_rows(panel, &window)?;

    let learner = match family {
        ModelFamily::PrevailingMean => LearnerConfig::PrevailingMean,
        ModelFamily::PreviousVolatility => {
            LearnerConfig::PreviousVolatility(config.models.volatility_baseline.clone())
        }
        _ => {
            let f = final_families(config)?
                .into_iter()
                .find(|f| f.family() == family)
                .ok_or_else(|| Error::Lookup(format!("family {} is not configured", family.as_str())))?;
            match target {
                FeatureSet::ReturnModel => f.return_model,
                FeatureSet::VolatilityModel => f.volatility_model,
            }
        }
    };
    let learner = learner.with_seed(config.seeds.seeds()[0]);
    let rows: Vec<usize> = match target {
        FeatureSet::ReturnModel if config.trim_quantile < 1.0 => {
            trim_mask(&panel.excess_returns()[..start], config.trim_quantile)?
                .into_iter()
                .enumerate()
                .filter_map(|(i, k)| k.then_some(i))
                .collect()
        }
        _ => (0..start).collect(),
    };
    let training = panel.dataset(&rows)?;
    let log_target = target == FeatureSet::VolatilityModel && config.log_volatility_target;
    let model = if log_target {
        learner.fit(&training.map_targets(f64::ln))?
    } else {
        learner.fit(&training)?
    };
    let references = feature_means(&training);
    let queries = panel.dataset_range(start, end)?;
    let summary = if log_target {
        let f = |x: &[f64]| model.predict(x).exp();
        mean_attributions(&f, &queries, &references, config.shap.samples, config.shap.seed)?
    } else {
        mean_attributions(&model, &queries, &references, config.shap.samples, config.shap.seed)?
    };

    let out = dir(config, "explain")?;
    let stem = format!("attributions_{}_{}", family.as_str(), target.as_str());
    write_attributions_csv(out.join(format!("{stem}.csv")), &[(model_ref.to_string(), summary.clone())])?;
    write_json(&out.join(format!("{stem}.json")), &summary)?;
    Ok(summary)
}

/// Renders the stored backtest report as text and saves it alongside.
pub fn cmd_report(config: &RunConfig) -> Result<String> {
    let base = config.output_dir.join("backtest");
    let path = base.join("report.json");
    if !path.exists() {
        return Err(Error::Lookup(format!("{} not found; run `backtest` first", path.display())));
    }
    let report = BacktestReport::read_json(&path)?;
    let text = report.render();
    let txt = base.join("report.txt");
    std::fs::write(&txt, &text).map_err(|e| Error::io(&txt, e))?;
    Ok(text)
}

/// Writes simulated monthly and daily files plus a config that points at
/// them, with split boundaries scaled to the simulated span.
pub fn cmd_simulate(out: &Path, sim: &SimulationConfig) -> Result<PathBuf> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let market = simulate(sim)?;
    market.write_monthly_csv(out.join("monthly.csv"))?;
    market.write_daily_csv(out.join("daily.csv"))?;
    let first_row = sim.start.ordinal() + 3;
    let rows = sim.months as i64 - 3;
    let at = |frac: f64| MonthStamp::from_ordinal(first_row + (rows as f64 * frac) as i64 - 1);
    let config = format!(
        "# Simulated inputs; see `rewardrisk simulate --help`.\n\
         output_dir = \"output\"\n\n\
         [data]\nmonthly = \"monthly.csv\"\ndaily = \"daily.csv\"\n\n\
         [split]\ntrain_end = \"{}\"\nvalidation_end = \"{}\"\ntest_end = \"{}\"\n",
        at(0.3),
        at(0.6),
        MonthStamp::from_ordinal(first_row + rows - 1),
    );
    let path = out.join("config.toml");
    std::fs::write(&path, config).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
