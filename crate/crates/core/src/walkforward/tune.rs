use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{accuracy_report, walk_forecast, Benchmark, WalkOptions};
use crate::error::{Error, Result};
use crate::learners::{LearnerConfig, ModelFamily};
use crate::market_data::{EvaluationWindow, PredictorPanel};

/// Candidate configurations, possibly spanning several learner families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningGrid {
    pub candidates: Vec<LearnerConfig>,
    /// Months between refits while scoring candidates.
    #[serde(default = "one")]
    pub refit_every: usize,
}

fn one() -> usize {
    1
}

impl TuningGrid {
    pub fn validate(&self) -> Result<()> {
        if self.candidates.is_empty() {
            return Err(Error::Config("tuning grid is empty".into()));
        }
        if self.refit_every == 0 {
            return Err(Error::Config("refit_every must be at least 1".into()));
        }
        self.candidates.iter().try_for_each(LearnerConfig::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub index: usize,
    pub config: LearnerConfig,
    /// Validation R², averaged over seeds for seeded learners.
    pub r_squared: Option<f64>,
    pub per_seed: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub family: ModelFamily,
    pub best: LearnerConfig,
    pub best_index: usize,
    pub best_r_squared: f64,
    pub scores: Vec<CandidateScore>,
}

fn n_trees(c: &LearnerConfig) -> usize {
    match c {
        LearnerConfig::Forest(f) => f.n_trees,
        _ => 0,
    }
}

fn lambda(c: &LearnerConfig) -> f64 {
    match c {
        LearnerConfig::ElasticNet(e) => e.lambda,
        _ => 0.0,
    }
}

/// Better-first ordering: higher R², then fewer trees, then larger λ, then
/// lower grid index.
fn rank(a: &CandidateScore, b: &CandidateScore) -> Ordering {
    let ra = a.r_squared.unwrap_or(f64::NEG_INFINITY);
    let rb = b.r_squared.unwrap_or(f64::NEG_INFINITY);
    rb.total_cmp(&ra)
        .then(n_trees(&a.config).cmp(&n_trees(&b.config)))
        .then(lambda(&b.config).total_cmp(&lambda(&a.config)))
        .then(a.index.cmp(&b.index))
}

fn score(
    panel: &PredictorPanel,
    config: &LearnerConfig,
    window: &EvaluationWindow,
    options: &WalkOptions,
    seed: Option<u64>,
    benchmark: Benchmark,
) -> Result<f64> {
    let config = seed.map_or_else(|| config.clone(), |s| config.with_seed(s));
    let walk = walk_forecast(panel, &config, window, options)?;
    Ok(accuracy_report(panel, window, &walk.forecasts, benchmark)?.r_squared_oos)
}

/// Scores every candidate by out-of-sample R² over `window` and picks the
/// best per learner family. Seeded learners are scored once per seed and
/// ranked by their mean.
pub fn tune(
    panel: &PredictorPanel,
    grid: &TuningGrid,
    window: &EvaluationWindow,
    options: &WalkOptions,
    seeds: &[u64],
    benchmark: Benchmark,
) -> Result<Vec<TuningResult>> {
    grid.validate()?;
    let options = WalkOptions {
        refit_every: grid.refit_every,
        ..options.clone()
    };
    let scores: Vec<CandidateScore> = grid
        .candidates
        .par_iter()
        .enumerate()
        .map(|(index, config)| {
            let runs: Vec<Option<u64>> = if config.is_seeded() && !seeds.is_empty() {
                seeds.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            let outcome: Result<Vec<f64>> = runs
                .iter()
                .map(|&seed| score(panel, config, window, &options, seed, benchmark))
                .collect();
            match outcome {
                Ok(per_seed) => CandidateScore {
                    index,
                    config: config.clone(),
                    r_squared: Some(per_seed.iter().sum::<f64>() / per_seed.len() as f64),
                    per_seed,
                    error: None,
                },
                Err(e) => CandidateScore {
                    index,
                    config: config.clone(),
                    r_squared: None,
                    per_seed: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let mut families: Vec<ModelFamily> = Vec::new();
    for s in &scores {
        if !families.contains(&s.config.family()) {
            families.push(s.config.family());
        }
    }
    families
        .into_iter()
        .map(|family| {
            let mut group: Vec<CandidateScore> = scores
                .iter()
                .filter(|s| s.config.family() == family)
                .cloned()
                .collect();
            if group.iter().all(|s| s.r_squared.is_none()) {
                return Err(Error::Aggregate(
                    group.iter().filter_map(|s| s.error.clone()).collect(),
                ));
            }
            let best = group.iter().min_by(|a, b| rank(a, b)).expect("nonempty").clone();
            group.sort_by_key(|s| s.index);
            Ok(TuningResult {
                family,
                best: best.config,
                best_index: best.index,
                best_r_squared: best.r_squared.expect("scored"),
                scores: group,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{ElasticNetConfig, ForestConfig};
    use crate::walkforward::test_support::return_panel;

    fn window(p: &PredictorPanel) -> EvaluationWindow {
        EvaluationWindow::new(p.months()[20], *p.months().last().unwrap()).unwrap()
    }

    fn linear_panel() -> PredictorPanel {
        // Target is linear in the row index with a small wobble.
        let y: Vec<f64> = (0..60).map(|i| 0.01 * i as f64 + 0.001 * ((i * 7) % 3) as f64).collect();
        return_panel(&y)
    }

    #[test]
    fn single_candidate_wins() {
        let p = linear_panel();
        let grid = TuningGrid {
            candidates: vec![LearnerConfig::ElasticNet(ElasticNetConfig::new(0.01, 0.5))],
            refit_every: 1,
        };
        let r = tune(&p, &grid, &window(&p), &WalkOptions::default(), &[], Benchmark::ExpandingMean).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].best_index, 0);
    }

    #[test]
    fn smaller_penalty_wins_on_linear_data() {
        let p = linear_panel();
        let grid = TuningGrid {
            candidates: vec![
                LearnerConfig::ElasticNet(ElasticNetConfig::new(10.0, 0.5)),
                LearnerConfig::ElasticNet(ElasticNetConfig::new(1e-4, 0.5)),
                LearnerConfig::Forest(ForestConfig {
                    n_trees: 10,
                    m_try: 1,
                    ..ForestConfig::return_default()
                }),
            ],
            refit_every: 1,
        };
        let r = tune(&p, &grid, &window(&p), &WalkOptions::default(), &[1, 2], Benchmark::ExpandingMean).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].family, ModelFamily::ElasticNet);
        assert_eq!(r[0].best_index, 1);
        assert_eq!(r[1].scores[0].per_seed.len(), 2);
        assert!(r[0].best_r_squared > r[1].best_r_squared);
    }

    #[test]
    fn ties_prefer_larger_lambda_then_lower_index() {
        let p = linear_panel();
        // Both penalties shrink every slope to zero, so scores tie exactly.
        let grid = TuningGrid {
            candidates: vec![
                LearnerConfig::ElasticNet(ElasticNetConfig::new(1e6, 1.0)),
                LearnerConfig::ElasticNet(ElasticNetConfig::new(1e7, 1.0)),
                LearnerConfig::ElasticNet(ElasticNetConfig::new(1e7, 1.0)),
            ],
            refit_every: 1,
        };
        let r = tune(&p, &grid, &window(&p), &WalkOptions::default(), &[], Benchmark::ExpandingMean).unwrap();
        assert_eq!(r[0].scores[0].r_squared, r[0].scores[1].r_squared);
        assert_eq!(r[0].best_index, 1);
    }

    #[test]
    fn empty_grid_is_config_error() {
        let p = linear_panel();
        let grid = TuningGrid {
            candidates: vec![],
            refit_every: 1,
        };
        let r = tune(&p, &grid, &window(&p), &WalkOptions::default(), &[], Benchmark::ExpandingMean);
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
