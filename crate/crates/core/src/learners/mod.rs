//! Supervised regressors sharing one fit/predict contract.
//!
//! All learners are written from scratch: a best-first CART regression tree
//! and its bagged random-subspace ensemble, cyclic coordinate-descent
//! elastic net, least squares, and the two naive baselines used as
//! benchmarks.

mod baseline;
mod elastic_net;
mod forest;
mod ols;
mod tree;

pub use baseline::{LagTransform, PreviousVolatilityConfig};
pub use elastic_net::{fit_elastic_net, soft_threshold, ElasticNetConfig};
pub use forest::{fit_forest, tree_rng, ForestConfig, RandomForest};
pub use ols::{fit_ols, solve_least_squares, OlsConfig};
pub use tree::{fit_tree, fit_tree_on_rows, RegressionTree, TreeParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major feature matrix with targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    targets: Vec<f64>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Vec<f64>, targets: Vec<f64>, feature_names: Vec<String>) -> Result<Self> {
        let n = targets.len();
        let p = feature_names.len();
        if n == 0 || p == 0 {
            return Err(Error::InsufficientData {
                what: "dataset".into(),
                needed: 1,
                got: n.min(p),
            });
        }
        if features.len() != n * p {
            return Err(Error::Alignment(format!(
                "{} feature cells for {n} rows x {p} columns",
                features.len()
            )));
        }
        if features.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(Error::Domain("dataset contains non-finite values".into()));
        }
        Ok(Self {
            features,
            targets,
            feature_names,
        })
    }

    /// Convenience constructor from row vectors with generated names.
    pub fn from_rows(rows: &[Vec<f64>], targets: Vec<f64>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::Alignment("ragged feature rows".into()));
        }
        let names = (0..p).map(|j| format!("x{j}")).collect();
        Self::new(rows.concat(), targets, names)
    }

    pub fn n_rows(&self) -> usize {
        self.targets.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_features();
        &self.features[i * p..(i + 1) * p]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.features[i * self.n_features() + j]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.value(i, j)).collect()
    }

    /// Copy with `f` applied to every target.
    pub fn map_targets(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            features: self.features.clone(),
            targets: self.targets.iter().map(|&y| f(y)).collect(),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Anything that maps a feature vector to a prediction.
pub trait Regressor: Sync {
    fn predict(&self, x: &[f64]) -> f64;
}

impl<F> Regressor for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn predict(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// Learner family, used to label strategies and forecasts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Forest,
    ElasticNet,
    Linear,
    PrevailingMean,
    PreviousVolatility,
}

impl ModelFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelFamily::Forest => "forest",
            ModelFamily::ElasticNet => "elastic_net",
            ModelFamily::Linear => "linear",
            ModelFamily::PrevailingMean => "prevailing_mean",
            ModelFamily::PreviousVolatility => "previous_volatility",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelFamily::Forest => "Random Forest",
            ModelFamily::ElasticNet => "Elastic Net",
            ModelFamily::Linear => "Linear Model",
            ModelFamily::PrevailingMean => "Prevailing Mean",
            ModelFamily::PreviousVolatility => "Previous Realized Volatility",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            ModelFamily::Forest,
            ModelFamily::ElasticNet,
            ModelFamily::Linear,
            ModelFamily::PrevailingMean,
            ModelFamily::PreviousVolatility,
        ]
        .into_iter()
        .find(|f| f.as_str() == s)
    }
}

/// Hyperparameters for one learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerConfig {
    Forest(ForestConfig),
    ElasticNet(ElasticNetConfig),
    Ols(OlsConfig),
    PrevailingMean,
    PreviousVolatility(PreviousVolatilityConfig),
}

impl LearnerConfig {
    pub fn family(&self) -> ModelFamily {
        match self {
            LearnerConfig::Forest(_) => ModelFamily::Forest,
            LearnerConfig::ElasticNet(_) => ModelFamily::ElasticNet,
            LearnerConfig::Ols(_) => ModelFamily::Linear,
            LearnerConfig::PrevailingMean => ModelFamily::PrevailingMean,
            LearnerConfig::PreviousVolatility(_) => ModelFamily::PreviousVolatility,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LearnerConfig::Forest(c) => c.validate(),
            LearnerConfig::ElasticNet(c) => c.validate(),
            _ => Ok(()),
        }
    }

    /// Same configuration with the forest seed replaced; other learners are
    /// returned unchanged.
    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            LearnerConfig::Forest(c) => LearnerConfig::Forest(ForestConfig { seed, ..c.clone() }),
            other => other.clone(),
        }
    }

    pub fn is_seeded(&self) -> bool {
        matches!(self, LearnerConfig::Forest(_))
    }

    pub fn fit(&self, data: &Dataset) -> Result<FittedModel> {
        match self {
            LearnerConfig::Forest(c) => fit_forest(data, c).map(FittedModel::Forest),
            LearnerConfig::ElasticNet(c) => fit_elastic_net(data, c).map(FittedModel::Linear),
            LearnerConfig::Ols(c) => fit_ols(data, c).map(FittedModel::Linear),
            LearnerConfig::PrevailingMean => Ok(baseline::fit_prevailing_mean(data)),
            LearnerConfig::PreviousVolatility(c) => baseline::fit_previous_volatility(data, c),
        }
    }
}

/// Intercept plus slopes, in original feature units.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Coefficients on the scale the penalty was applied to (standardized
    /// features when standardization is on). Equal to `coefficients` for
    /// least squares.
    pub penalized_coefficients: Vec<f64>,
    pub converged: bool,
    pub sweeps: usize,
    /// Objective value after each coordinate-descent sweep.
    pub objective_trace: Vec<f64>,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(x)
                .map(|(b, v)| b * v)
                .sum::<f64>()
    }
}

/// A trained learner.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Forest(RandomForest),
    Linear(LinearModel),
    PrevailingMean { mean: f64 },
    PreviousVolatility { column: usize, transform: LagTransform },
}

impl FittedModel {
    pub fn family(&self) -> &'static str {
        match self {
            FittedModel::Forest(_) => "forest",
            FittedModel::Linear(_) => "linear",
            FittedModel::PrevailingMean { .. } => "prevailing_mean",
            FittedModel::PreviousVolatility { .. } => "previous_volatility",
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        match self {
            FittedModel::Forest(f) => f.predict(x),
            FittedModel::Linear(m) => m.predict(x),
            FittedModel::PrevailingMean { mean } => *mean,
            FittedModel::PreviousVolatility { column, transform } => transform.apply(x[*column]),
        }
    }

    pub fn as_linear(&self) -> Option<&LinearModel> {
        match self {
            FittedModel::Linear(m) => Some(m),
            _ => None,
        }
    }
}

impl Regressor for FittedModel {
    fn predict(&self, x: &[f64]) -> f64 {
        FittedModel::predict(self, x)
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
