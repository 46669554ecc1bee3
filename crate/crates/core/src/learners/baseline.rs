use serde::{Deserialize, Serialize};

use super::{mean, Dataset, FittedModel};
use crate::error::{Error, Result};

/// Maps a lagged realized-variance feature onto the target scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagTransform {
    /// Feature already in target units.
    Identity,
    /// Variance feature, volatility target.
    #[default]
    Sqrt,
    /// Variance feature, log-variance target.
    Log,
}

impl LagTransform {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            LagTransform::Identity => v,
            LagTransform::Sqrt => v.max(0.0).sqrt(),
            LagTransform::Log => v.ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreviousVolatilityConfig {
    pub column: String,
    pub transform: LagTransform,
}

impl Default for PreviousVolatilityConfig {
    fn default() -> Self {
        Self {
            column: "rvar_lag1".into(),
            transform: LagTransform::Sqrt,
        }
    }
}

pub(super) fn fit_prevailing_mean(data: &Dataset) -> FittedModel {
    FittedModel::PrevailingMean {
        mean: mean(data.targets()),
    }
}

pub(super) fn fit_previous_volatility(
    data: &Dataset,
    config: &PreviousVolatilityConfig,
) -> Result<FittedModel> {
    let column = data.feature_index(&config.column).ok_or_else(|| Error::Schema {
        column: config.column.clone(),
    })?;
    Ok(FittedModel::PreviousVolatility {
        column,
        transform: config.transform,
    })
}
