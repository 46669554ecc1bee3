use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DailyReturns, RawSeries};
use crate::error::{Error, Result};
use crate::learners::Dataset;
use crate::month::MonthStamp;

/// Goyal-Welch style predictors shared by both feature sets.
pub const MACRO_PREDICTORS: [&str; 11] = [
    "dp", "ep", "bm", "ntis", "tbl", "tms", "dfy", "infl", "corpr", "ltr", "svar",
];

const LAGS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    /// Predicts the month's simple excess return; carries payout-yield lags.
    ReturnModel,
    /// Predicts the month's realized volatility; carries realized-variance lags.
    VolatilityModel,
}

impl FeatureSet {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::ReturnModel => "return",
            FeatureSet::VolatilityModel => "volatility",
        }
    }

    /// Column names in panel order.
    pub fn feature_names(self) -> Vec<String> {
        let mut names: Vec<String> = MACRO_PREDICTORS.iter().map(|s| s.to_string()).collect();
        names.push("exret_lag1".into());
        let lagged = match self {
            FeatureSet::ReturnModel => "npy_lag",
            FeatureSet::VolatilityModel => "rvar_lag",
        };
        names.extend((1..=LAGS).map(|l| format!("{lagged}{l}")));
        names
    }
}

/// Aligned monthly panel. Features in row `t` are observed through `t-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorPanel {
    feature_set: FeatureSet,
    months: Vec<MonthStamp>,
    feature_names: Vec<String>,
    features: Vec<f64>,
    excess_return: Vec<f64>,
    volatility: Vec<f64>,
    market_return: Vec<f64>,
    riskfree: Vec<f64>,
    realized_variance: Vec<f64>,
    prev_realized_variance: Vec<f64>,
}

/// Per-month columns that are not learner inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelOutcome {
    pub market_return: f64,
    pub riskfree: f64,
    pub realized_variance: f64,
    pub prev_realized_variance: f64,
}

impl PredictorPanel {
    /// Assembles a panel from already-aligned columns.
    ///
    /// `features` is row-major with one row per month. Months must be
    /// contiguous.
    pub fn from_parts(
        feature_set: FeatureSet,
        months: Vec<MonthStamp>,
        feature_names: Vec<String>,
        features: Vec<f64>,
        outcomes: Vec<PanelOutcome>,
    ) -> Result<Self> {
        let n = months.len();
        let p = feature_names.len();
        if n == 0 || p == 0 {
            return Err(Error::InsufficientData {
                what: "panel".into(),
                needed: 1,
                got: 0,
            });
        }
        if features.len() != n * p || outcomes.len() != n {
            return Err(Error::Alignment(format!(
                "panel parts disagree: {n} months, {p} features, {} feature cells, {} outcome rows",
                features.len(),
                outcomes.len()
            )));
        }
        for pair in months.windows(2) {
            if pair[1] != pair[0].succ() {
                return Err(Error::Gap {
                    series: "panel".into(),
                    missing: pair[0].succ(),
                });
            }
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite feature {} at {}",
                feature_names[i % p],
                months[i / p]
            )));
        }
        Ok(Self {
            feature_set,
            months,
            feature_names,
            features,
            excess_return: outcomes.iter().map(|o| o.market_return - o.riskfree).collect(),
            volatility: outcomes.iter().map(|o| o.realized_variance.sqrt()).collect(),
            market_return: outcomes.iter().map(|o| o.market_return).collect(),
            riskfree: outcomes.iter().map(|o| o.riskfree).collect(),
            realized_variance: outcomes.iter().map(|o| o.realized_variance).collect(),
            prev_realized_variance: outcomes.iter().map(|o| o.prev_realized_variance).collect(),
        })
    }

    pub fn feature_set(&self) -> FeatureSet {
        self.feature_set
    }

    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    pub fn months(&self) -> &[MonthStamp] {
        &self.months
    }

    pub fn first_month(&self) -> MonthStamp {
        self.months[0]
    }

    pub fn last_month(&self) -> MonthStamp {
        self.months[self.months.len() - 1]
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_features();
        &self.features[i * p..(i + 1) * p]
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.feature_index(name).ok_or_else(|| Error::Schema {
            column: name.to_string(),
        })?;
        Ok((0..self.len()).map(|i| self.row(i)[j]).collect())
    }

    /// Row index of `month`, if present.
    pub fn index_of(&self, month: MonthStamp) -> Option<usize> {
        let offset = self.first_month().months_until(month);
        usize::try_from(offset).ok().filter(|&i| i < self.len())
    }

    /// Number of rows strictly before `month`.
    pub fn rows_before(&self, month: MonthStamp) -> usize {
        let offset = self.first_month().months_until(month);
        offset.clamp(0, self.len() as i64) as usize
    }

    /// Learner target: excess return or realized volatility depending on the
    /// feature set.
    pub fn targets(&self) -> &[f64] {
        match self.feature_set {
            FeatureSet::ReturnModel => &self.excess_return,
            FeatureSet::VolatilityModel => &self.volatility,
        }
    }

    /// Simple excess return `R_t - R^f_t`.
    pub fn excess_returns(&self) -> &[f64] {
        &self.excess_return
    }

    /// Realized monthly volatility `sqrt(RV_t)`.
    pub fn volatilities(&self) -> &[f64] {
        &self.volatility
    }

    pub fn market_returns(&self) -> &[f64] {
        &self.market_return
    }

    pub fn riskfree(&self) -> &[f64] {
        &self.riskfree
    }

    pub fn realized_variances(&self) -> &[f64] {
        &self.realized_variance
    }

    /// Realized variance of the month before each row.
    pub fn prev_realized_variances(&self) -> &[f64] {
        &self.prev_realized_variance
    }

    /// Learner dataset over the given rows.
    pub fn dataset(&self, rows: &[usize]) -> Result<Dataset> {
        let p = self.n_features();
        let mut features = Vec::with_capacity(rows.len() * p);
        let mut targets = Vec::with_capacity(rows.len());
        let all_targets = self.targets();
        for &i in rows {
            features.extend_from_slice(self.row(i));
            targets.push(all_targets[i]);
        }
        Dataset::new(features, targets, self.feature_names.clone())
    }

    /// Dataset over the contiguous row range `start..end`.
    pub fn dataset_range(&self, start: usize, end: usize) -> Result<Dataset> {
        let rows: Vec<usize> = (start..end).collect();
        self.dataset(&rows)
    }

    /// Panel restricted to rows `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        let p = self.n_features();
        Self {
            feature_set: self.feature_set,
            months: self.months[start..end].to_vec(),
            feature_names: self.feature_names.clone(),
            features: self.features[start * p..end * p].to_vec(),
            excess_return: self.excess_return[start..end].to_vec(),
            volatility: self.volatility[start..end].to_vec(),
            market_return: self.market_return[start..end].to_vec(),
            riskfree: self.riskfree[start..end].to_vec(),
            realized_variance: self.realized_variance[start..end].to_vec(),
            prev_realized_variance: self.prev_realized_variance[start..end].to_vec(),
        }
    }

    /// Rows selected by a keep mask. The result may be non-contiguous in time
    /// and is meant only as a fitting set.
    pub fn filter_rows(&self, keep: &[bool]) -> Self {
        let p = self.n_features();
        let pick = |v: &[f64]| -> Vec<f64> {
            v.iter().zip(keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect()
        };
        let mut features = Vec::new();
        for (i, k) in keep.iter().enumerate() {
            if *k {
                features.extend_from_slice(&self.features[i * p..(i + 1) * p]);
            }
        }
        Self {
            feature_set: self.feature_set,
            months: self
                .months
                .iter()
                .zip(keep)
                .filter(|(_, k)| **k)
                .map(|(m, _)| *m)
                .collect(),
            feature_names: self.feature_names.clone(),
            features,
            excess_return: pick(&self.excess_return),
            volatility: pick(&self.volatility),
            market_return: pick(&self.market_return),
            riskfree: pick(&self.riskfree),
            realized_variance: pick(&self.realized_variance),
            prev_realized_variance: pick(&self.prev_realized_variance),
        }
    }

    const FIXED_COLUMNS: [&'static str; 7] = [
        "date",
        "target_excess_return",
        "target_volatility",
        "market_return",
        "riskfree",
        "realized_variance",
        "prev_realized_variance",
    ];

    /// Writes the panel as comma-delimited text. Floats use the shortest
    /// representation that round-trips exactly.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let mut header: Vec<&str> = Self::FIXED_COLUMNS.to_vec();
        header.extend(self.feature_names.iter().map(String::as_str));
        let io = |e| Error::io(path, e);
        writeln!(out, "{}", header.join(",")).map_err(io)?;
        for i in 0..self.len() {
            write!(
                out,
                "{},{},{},{},{},{},{}",
                self.months[i],
                self.excess_return[i],
                self.volatility[i],
                self.market_return[i],
                self.riskfree[i],
                self.realized_variance[i],
                self.prev_realized_variance[i]
            )
            .map_err(io)?;
            for v in self.row(i) {
                write!(out, ",{v}").map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    /// Reads a panel written by [`PredictorPanel::write_csv`].
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::Reader::from_reader(file);
        let parse_err = |line: u64, message: String| Error::Parse {
            file: path.display().to_string(),
            line,
            message,
        };
        let headers = reader
            .headers()
            .map_err(|e| parse_err(0, e.to_string()))?
            .clone();
        for (i, col) in Self::FIXED_COLUMNS.iter().enumerate() {
            if headers.get(i) != Some(col) {
                return Err(Error::Schema {
                    column: col.to_string(),
                });
            }
        }
        let feature_names: Vec<String> = headers
            .iter()
            .skip(Self::FIXED_COLUMNS.len())
            .map(str::to_string)
            .collect();
        let feature_set = if feature_names.iter().any(|n| n.starts_with("rvar_lag")) {
            FeatureSet::VolatilityModel
        } else {
            FeatureSet::ReturnModel
        };
        let mut months = Vec::new();
        let mut features = Vec::new();
        let mut outcomes = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| parse_err(0, e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line());
            let month = MonthStamp::parse_yyyymm(&record[0])
                .ok_or_else(|| parse_err(line, format!("invalid month \"{}\"", &record[0])))?;
            let nums = record
                .iter()
                .skip(1)
                .map(|v| v.parse::<f64>().map_err(|e| parse_err(line, format!("{v}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if nums.len() != Self::FIXED_COLUMNS.len() - 1 + feature_names.len() {
                return Err(parse_err(line, "wrong number of fields".into()));
            }
            months.push(month);
            outcomes.push(PanelOutcome {
                market_return: nums[2],
                riskfree: nums[3],
                realized_variance: nums[4],
                prev_realized_variance: nums[5],
            });
            features.extend_from_slice(&nums[6..]);
        }
        Self::from_parts(feature_set, months, feature_names, features, outcomes)
    }
}

fn find<'a>(series: &'a [RawSeries], name: &str) -> Result<&'a RawSeries> {
    series
        .iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| Error::Schema {
            column: name.to_string(),
        })
}

/// Builds the lagged predictor panel for one model.
///
/// Rows start once three months of history exist for the lag features;
/// nothing is imputed.
pub fn build_panel(
    series: &[RawSeries],
    daily: &DailyReturns,
    feature_set: FeatureSet,
) -> Result<PredictorPanel> {
    let mkt = find(series, "mkt")?;
    let rf = find(series, "rf")?;
    let macros = MACRO_PREDICTORS
        .iter()
        .map(|name| find(series, name))
        .collect::<Result<Vec<_>>>()?;
    let rv = daily.realized_variance_series()?;
    let lagged = match feature_set {
        FeatureSet::ReturnModel => find(series, "npy")?,
        FeatureSet::VolatilityModel => &rv,
    };

    let mut all: Vec<&RawSeries> = vec![mkt, rf, &rv, lagged];
    all.extend(macros.iter().copied());
    let start = all.iter().map(|s| s.start()).max().expect("nonempty");
    let end = all.iter().map(|s| s.end()).min().expect("nonempty");
    let covered = start.months_until(end) + 1;
    if covered <= LAGS as i64 {
        return Err(Error::InsufficientData {
            what: "panel history (common months)".into(),
            needed: LAGS + 1,
            got: covered.max(0) as usize,
        });
    }

    let at = |s: &RawSeries, m: MonthStamp| s.get(m).expect("month within common range");
    let first_row = MonthStamp::from_ordinal(start.ordinal() + LAGS as i64);
    let n_rows = first_row.months_until(end) as usize + 1;
    let feature_names = feature_set.feature_names();
    let mut months = Vec::with_capacity(n_rows);
    let mut features = Vec::with_capacity(n_rows * feature_names.len());
    let mut outcomes = Vec::with_capacity(n_rows);
    let mut t = first_row;
    for _ in 0..n_rows {
        let prev = t.pred();
        features.extend(macros.iter().map(|s| at(s, prev)));
        features.push(at(mkt, prev) - at(rf, prev));
        let mut lag_month = prev;
        for _ in 0..LAGS {
            features.push(at(lagged, lag_month));
            lag_month = lag_month.pred();
        }
        months.push(t);
        outcomes.push(PanelOutcome {
            market_return: at(mkt, t),
            riskfree: at(rf, t),
            realized_variance: at(&rv, t),
            prev_realized_variance: at(&rv, prev),
        });
        t = t.succ();
    }
    PredictorPanel::from_parts(feature_set, months, feature_names, features, outcomes)
}
