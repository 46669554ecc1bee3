use std::path::Path;

use serde::{Deserialize, Serialize};

use super::WalkResult;
use crate::error::{Error, Result};
use crate::month::MonthStamp;

/// Smallest monthly volatility forecast passed downstream; the optimal
/// weight divides by its square.
pub const VOLATILITY_FLOOR: f64 = 1e-6;

/// Out-of-sample return and volatility forecasts for one model and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSeries {
    pub months: Vec<MonthStamp>,
    pub return_forecast: Option<Vec<f64>>,
    /// Monthly σ, floored at [`VOLATILITY_FLOOR`].
    pub volatility_forecast: Option<Vec<f64>>,
    /// Last month of training data behind each forecast.
    pub cutoffs: Vec<MonthStamp>,
    pub model: String,
    pub seed: Option<u64>,
}

impl ForecastSeries {
    /// Combines a return pass and a volatility pass over the same months.
    /// Either may be absent; at least one must be given.
    pub fn from_walks(
        model: impl Into<String>,
        seed: Option<u64>,
        returns: Option<&WalkResult>,
        volatility: Option<&WalkResult>,
    ) -> Result<Self> {
        let base = returns
            .or(volatility)
            .ok_or_else(|| Error::Config("forecast series needs at least one forecast pass".into()))?;
        if let (Some(r), Some(v)) = (returns, volatility) {
            if r.months != v.months {
                return Err(Error::Alignment(
                    "return and volatility forecasts cover different months".into(),
                ));
            }
        }
        let cutoffs = match (returns, volatility) {
            (Some(r), Some(v)) => r.cutoffs.iter().zip(&v.cutoffs).map(|(a, b)| (*a).min(*b)).collect(),
            _ => base.cutoffs.clone(),
        };
        Ok(Self {
            months: base.months.clone(),
            return_forecast: returns.map(|r| r.forecasts.clone()),
            volatility_forecast: volatility
                .map(|v| v.forecasts.iter().map(|&s| s.max(VOLATILITY_FLOOR)).collect()),
            cutoffs,
            model: model.into(),
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    pub fn returns(&self) -> Result<&[f64]> {
        self.return_forecast.as_deref().ok_or_else(|| Error::Dependency {
            column: "return_forecast".into(),
        })
    }

    pub fn volatilities(&self) -> Result<&[f64]> {
        self.volatility_forecast.as_deref().ok_or_else(|| Error::Dependency {
            column: "vol_forecast".into(),
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ForecastRecord {
    date: MonthStamp,
    return_forecast: Option<f64>,
    vol_forecast: Option<f64>,
    model: String,
    seed: Option<u64>,
}

/// Writes `date,return_forecast,vol_forecast,model,seed` rows; missing
/// columns and unseeded models leave empty cells.
pub fn write_forecasts_csv(path: impl AsRef<Path>, series: &[ForecastSeries]) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for s in series {
        for (i, &date) in s.months.iter().enumerate() {
            writer
                .serialize(ForecastRecord {
                    date,
                    return_forecast: s.return_forecast.as_ref().map(|v| v[i]),
                    vol_forecast: s.volatility_forecast.as_ref().map(|v| v[i]),
                    model: s.model.clone(),
                    seed: s.seed,
                })
                .map_err(|e| csv_error(path, e))?;
        }
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Reads a file written by [`write_forecasts_csv`], regrouping rows by
/// `(model, seed)` in order of first appearance. Information-set cutoffs are
/// not persisted and are reconstructed as the month before each forecast.
pub fn read_forecasts_csv(path: impl AsRef<Path>) -> Result<Vec<ForecastSeries>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut out: Vec<ForecastSeries> = Vec::new();
    for record in reader.deserialize::<ForecastRecord>() {
        let r = record.map_err(|e| csv_error(path, e))?;
        let idx = match out.iter().position(|s| s.model == r.model && s.seed == r.seed) {
            Some(i) => i,
            None => {
                out.push(ForecastSeries {
                    months: Vec::new(),
                    return_forecast: r.return_forecast.map(|_| Vec::new()),
                    volatility_forecast: r.vol_forecast.map(|_| Vec::new()),
                    cutoffs: Vec::new(),
                    model: r.model.clone(),
                    seed: r.seed,
                });
                out.len() - 1
            }
        };
        let s = &mut out[idx];
        s.months.push(r.date);
        s.cutoffs.push(r.date.pred());
        for (column, value, name) in [
            (&mut s.return_forecast, r.return_forecast, "return_forecast"),
            (&mut s.volatility_forecast, r.vol_forecast, "vol_forecast"),
        ] {
            match (column, value) {
                (Some(col), Some(v)) => col.push(v),
                (None, None) => {}
                _ => {
                    return Err(Error::Parse {
                        file: path.display().to_string(),
                        line: 0,
                        message: format!("{name} present for only part of {}", s.model),
                    })
                }
            }
        }
    }
    Ok(out)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        file: path.display().to_string(),
        line,
        message: e.to_string(),
    }
}
