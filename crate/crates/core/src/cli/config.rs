//! Run configuration: one TOML document, with command-line `key=value`
//! overrides applied before validation.

use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::allocation::WeightBounds;
use crate::analytics::{CeAnnualization, CovarianceType};
use crate::error::{Error, Result};
use crate::learners::{
    ElasticNetConfig, ForestConfig, LearnerConfig, ModelFamily, OlsConfig, PreviousVolatilityConfig,
};
use crate::market_data::{DailySchema, MonthlySchema, SplitSpec};
use crate::walkforward::Benchmark;

/// Environment variable overriding `output_dir`.
pub const OUTPUT_ENV: &str = "REWARDRISK_OUTPUT";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Monthly file with market return, risk-free rate and predictors.
    pub monthly: Option<PathBuf>,
    /// Daily market excess returns.
    pub daily: Option<PathBuf>,
    pub monthly_schema: MonthlySchema,
    pub daily_schema: DailySchema,
}

/// Return and volatility learners of one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyModels {
    pub return_model: LearnerConfig,
    pub volatility_model: LearnerConfig,
}

impl FamilyModels {
    pub fn family(&self) -> ModelFamily {
        self.return_model.family()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSet {
    pub families: Vec<FamilyModels>,
    pub volatility_baseline: PreviousVolatilityConfig,
    /// Prefer configurations selected by `tune` when they exist.
    pub use_tuned: bool,
}

impl Default for ModelSet {
    fn default() -> Self {
        Self {
            families: vec![
                FamilyModels {
                    return_model: LearnerConfig::Forest(ForestConfig::return_default()),
                    volatility_model: LearnerConfig::Forest(ForestConfig::volatility_default()),
                },
                FamilyModels {
                    return_model: LearnerConfig::ElasticNet(ElasticNetConfig::return_default()),
                    volatility_model: LearnerConfig::ElasticNet(ElasticNetConfig::volatility_default()),
                },
                FamilyModels {
                    return_model: LearnerConfig::Ols(OlsConfig::default()),
                    volatility_model: LearnerConfig::Ols(OlsConfig::default()),
                },
            ],
            volatility_baseline: PreviousVolatilityConfig::default(),
            use_tuned: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuningConfig {
    pub return_grid: Vec<LearnerConfig>,
    pub volatility_grid: Vec<LearnerConfig>,
    pub refit_every: usize,
}

impl Default for TuningConfig {
    fn default() -> Self {
        let models = ModelSet::default();
        Self {
            return_grid: models.families.iter().map(|f| f.return_model.clone()).collect(),
            volatility_grid: models.families.iter().map(|f| f.volatility_model.clone()).collect(),
            refit_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedConfig {
    pub master: u64,
    pub count: usize,
    /// Explicit seed list; overrides `master` and `count` when nonempty.
    pub list: Vec<u64>,
}

impl Default for SeedConfig {
    fn default() -> Self {
        Self {
            master: 0,
            count: 5,
            list: Vec::new(),
        }
    }
}

impl SeedConfig {
    pub fn seeds(&self) -> Vec<u64> {
        if !self.list.is_empty() {
            return self.list.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        (0..self.count).map(|_| rng.next_u64()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for ShapConfig {
    fn default() -> Self {
        Self {
            samples: crate::explain::DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub split: SplitSpec,
    pub models: ModelSet,
    pub tuning: TuningConfig,
    /// Relative risk aversion levels.
    pub gammas: Vec<f64>,
    /// Weight bounds; each yields a separate set of strategies.
    pub bounds: Vec<WeightBounds>,
    /// Quantile of |excess return| kept when fitting return models; 1 keeps
    /// every row.
    pub trim_quantile: f64,
    pub seeds: SeedConfig,
    pub cost_bps: Vec<f64>,
    pub benchmark: Benchmark,
    pub ce_annualization: CeAnnualization,
    pub covariance: CovarianceType,
    /// Months between refits in the backtest.
    pub refit_every: usize,
    /// Fit volatility learners on log σ.
    pub log_volatility_target: bool,
    pub shap: ShapConfig,
    /// Risk aversion of the base-versus-volatility-timing weight comparison.
    pub fig1_gamma: f64,
    /// Worker threads; all cores when absent. Results do not depend on it.
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: DataConfig::default(),
            split: SplitSpec::default(),
            models: ModelSet::default(),
            tuning: TuningConfig::default(),
            gammas: vec![4.0, 6.0],
            bounds: vec![WeightBounds::LEVERED, WeightBounds::UNLEVERED],
            trim_quantile: 0.9,
            seeds: SeedConfig::default(),
            cost_bps: vec![1.0, 10.0, 14.0],
            benchmark: Benchmark::ExpandingMean,
            ce_annualization: CeAnnualization::Geometric,
            covariance: CovarianceType::Hc0,
            refit_every: 1,
            log_volatility_target: false,
            shap: ShapConfig::default(),
            fig1_gamma: 6.0,
            threads: None,
            output_dir: PathBuf::from("output"),
        }
    }
}

fn parse_override(raw: &str) -> Result<(Vec<String>, toml::Value)> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override \"{raw}\" is not key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(str::to_string).collect();
    if path.iter().any(String::is_empty) {
        return Err(Error::Config(format!("override key \"{key}\" is malformed")));
    }
    let value = value.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((path, parsed))
}

fn apply_override(table: &mut toml::Table, path: &[String], value: toml::Value) -> Result<()> {
    let (last, parents) = path.split_last().expect("nonempty path");
    let mut cursor = table;
    for key in parents {
        let entry = cursor
            .entry(key.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override path {} crosses a non-table", path.join("."))))?;
    }
    cursor.insert(last.clone(), value);
    Ok(())
}

impl RunConfig {
    /// Reads `path` (or starts from defaults), applies `key=value`
    /// overrides and the output-root environment variable, then validates.
    /// Relative data paths are resolved against the config file's
    /// directory.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                toml::from_str::<toml::Table>(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for raw in overrides {
            let (key, value) = parse_override(raw)?;
            apply_override(&mut table, &key, value)?;
        }
        let mut config: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let Some(base) = path.and_then(Path::parent) {
            for p in [&mut config.data.monthly, &mut config.data.daily].into_iter().flatten() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        if let Some(root) = std::env::var_os(OUTPUT_ENV) {
            config.output_dir = PathBuf::from(root);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        if self.gammas.is_empty() || self.gammas.iter().any(|g| !(*g > 0.0)) {
            return Err(Error::Config("gammas must be a nonempty list of positive values".into()));
        }
        if self.bounds.is_empty() {
            return Err(Error::Config("bounds must be nonempty".into()));
        }
        self.bounds.iter().try_for_each(WeightBounds::validate)?;
        if !(self.trim_quantile > 0.0 && self.trim_quantile <= 1.0) {
            return Err(Error::Config(format!("trim_quantile {} outside (0, 1]", self.trim_quantile)));
        }
        if self.cost_bps.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::Config("cost_bps must be >= 0".into()));
        }
        if self.refit_every == 0 || self.tuning.refit_every == 0 {
            return Err(Error::Config("refit_every must be at least 1".into()));
        }
        if self.seeds.seeds().is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.shap.samples == 0 {
            return Err(Error::Config("shap.samples must be positive".into()));
        }
        if !(self.fig1_gamma > 0.0) {
            return Err(Error::Config("fig1_gamma must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        let mut seen = Vec::new();
        for f in &self.models.families {
            f.return_model.validate()?;
            f.volatility_model.validate()?;
            let family = f.family();
            if f.volatility_model.family() != family {
                return Err(Error::Config(format!(
                    "family entry mixes {} and {} learners",
                    family.as_str(),
                    f.volatility_model.family().as_str()
                )));
            }
            if !matches!(family, ModelFamily::Forest | ModelFamily::ElasticNet | ModelFamily::Linear) {
                return Err(Error::Config(format!(
                    "{} is a baseline, not a strategy family",
                    family.as_str()
                )));
            }
            if seen.contains(&family) {
                return Err(Error::Config(format!("family {} listed twice", family.as_str())));
            }
            seen.push(family);
        }
        self.tuning
            .return_grid
            .iter()
            .chain(&self.tuning.volatility_grid)
            .try_for_each(LearnerConfig::validate)
    }

    /// The resolved configuration as TOML.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot render configuration: {e}")))
    }

    /// SHA-256 of the canonical JSON form, ignoring settings that cannot
    /// change results (output location and thread count).
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        canonical.threads = None;
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }
}
