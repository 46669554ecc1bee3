//! Synthetic monthly and daily market data with volatility clustering and a
//! planted linear return signal, in the same shape as the real inputs.
//!
//! Monthly log variance follows an AR(1); daily excess returns are normal
//! with that month's variance spread evenly across trading days, plus a
//! drift driven by last month's `dp`. The remaining predictors are
//! independent AR(1) noise, except `svar`, the raw sum of squared daily
//! returns.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{
    DailyObservation, DailyReturns, RawSeries, MACRO_PREDICTORS,
};
use crate::month::MonthStamp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub start: MonthStamp,
    pub months: usize,
    pub trading_days: usize,
    pub seed: u64,
    /// Unconditional monthly expected excess return.
    pub mean_excess: f64,
    /// Expected excess return per unit of standardized lagged `dp`.
    pub signal: f64,
    /// Persistence of the predictors.
    pub predictor_persistence: f64,
    /// Long-run monthly volatility.
    pub volatility: f64,
    /// Persistence of monthly log variance.
    pub variance_persistence: f64,
    /// Innovation std of monthly log variance.
    pub variance_shock: f64,
    pub riskfree: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            start: MonthStamp::new(1927, 1).expect("valid"),
            months: 1000,
            trading_days: 21,
            seed: 0,
            mean_excess: 0.005,
            signal: 0.01,
            predictor_persistence: 0.9,
            volatility: 0.045,
            variance_persistence: 0.9,
            variance_shock: 0.35,
            riskfree: 0.003,
        }
    }
}

/// Simulated inputs ready for [`crate::market_data::build_panel`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedMarket {
    pub series: Vec<RawSeries>,
    pub daily: DailyReturns,
}

fn ar1(rng: &mut ChaCha8Rng, n: usize, phi: f64) -> Vec<f64> {
    // Stationary unit-variance AR(1).
    let scale = (1.0 - phi * phi).sqrt();
    let mut x: f64 = rng.sample(StandardNormal);
    (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            x = phi * x + scale * z;
            x
        })
        .collect()
}

pub fn simulate(config: &SimulationConfig) -> Result<SimulatedMarket> {
    if config.months < 4 || config.trading_days < crate::market_data::MIN_TRADING_DAYS {
        return Err(Error::Config(format!(
            "simulation needs >= 4 months and >= {} trading days",
            crate::market_data::MIN_TRADING_DAYS
        )));
    }
    if config.trading_days > 28 {
        return Err(Error::Config("at most 28 trading days per month".into()));
    }
    let n = config.months;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let phi = config.predictor_persistence;

    let log_var = {
        let mean = (config.volatility * config.volatility).ln();
        let shocks = ar1(&mut rng, n, config.variance_persistence);
        let sd = config.variance_shock / (1.0 - config.variance_persistence.powi(2)).sqrt();
        // Centre so that E[σ²] matches the target volatility.
        shocks.iter().map(|s| mean - 0.5 * sd * sd + sd * s).collect::<Vec<f64>>()
    };
    let dp = ar1(&mut rng, n, phi);
    let month = |i: usize| MonthStamp::from_ordinal(config.start.ordinal() + i as i64);

    let d = config.trading_days as f64;
    let mut excess = Vec::with_capacity(n);
    let mut svar = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    for i in 0..n {
        let drift = config.mean_excess + if i > 0 { config.signal * dp[i - 1] } else { 0.0 };
        let daily_sd = (log_var[i].exp() / d).sqrt();
        let days: Vec<DailyObservation> = (0..config.trading_days)
            .map(|k| {
                let z: f64 = rng.sample(StandardNormal);
                DailyObservation {
                    day: k as u8 + 1,
                    excess_return: drift / d + daily_sd * z,
                }
            })
            .collect();
        let values: Vec<f64> = days.iter().map(|o| o.excess_return).collect();
        excess.push(values.iter().sum::<f64>());
        svar.push(values.iter().map(|r| r * r).sum::<f64>());
        groups.push((month(i), days));
    }

    let rf: Vec<f64> = vec![config.riskfree; n];
    let series_of = |name: &str, values: Vec<f64>| {
        RawSeries::from_observations(name, values.into_iter().enumerate().map(|(i, v)| (month(i), v)))
    };
    let mut series = vec![
        series_of("mkt", excess.iter().zip(&rf).map(|(e, f)| e + f).collect())?,
        series_of("rf", rf.clone())?,
    ];
    for name in MACRO_PREDICTORS {
        let values = match name {
            "dp" => dp.clone(),
            "svar" => svar.clone(),
            _ => ar1(&mut rng, n, phi),
        };
        series.push(series_of(name, values)?);
    }
    series.push(series_of("npy", ar1(&mut rng, n, phi))?);
    Ok(SimulatedMarket {
        series,
        daily: DailyReturns::new(groups)?,
    })
}

impl SimulatedMarket {
    /// Writes a monthly file readable with the default monthly schema.
    pub fn write_monthly_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        let names: Vec<&str> = self.series.iter().map(RawSeries::name).collect();
        writeln!(out, "date,{}", names.join(",")).map_err(io)?;
        for (i, (m, _)) in self.series[0].iter().enumerate() {
            write!(out, "{m}").map_err(io)?;
            for s in &self.series {
                write!(out, ",{}", s.values()[i]).map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    /// Writes a `date,mktrf` daily file with `yyyymmdd` dates.
    pub fn write_daily_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "date,mktrf").map_err(io)?;
        for m in self.daily.months() {
            for o in self.daily.group(m).expect("listed month") {
                writeln!(out, "{m}{:02},{}", o.day, o.excess_return).map_err(io)?;
            }
        }
        out.flush().map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::{build_panel, load_daily, load_monthly, FeatureSet};

    #[test]
    fn files_round_trip_into_identical_panels() {
        let cfg = SimulationConfig {
            months: 60,
            seed: 4,
            ..SimulationConfig::default()
        };
        let sim = simulate(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        sim.write_monthly_csv(dir.path().join("m.csv")).unwrap();
        sim.write_daily_csv(dir.path().join("d.csv")).unwrap();
        let series = load_monthly(dir.path().join("m.csv"), &Default::default()).unwrap();
        let daily = load_daily(dir.path().join("d.csv"), &Default::default()).unwrap();
        for fs in [FeatureSet::ReturnModel, FeatureSet::VolatilityModel] {
            let a = build_panel(&sim.series, &sim.daily, fs).unwrap();
            let b = build_panel(&series, &daily, fs).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 57);
        }
    }

    #[test]
    fn seeded() {
        let cfg = SimulationConfig {
            months: 30,
            ..SimulationConfig::default()
        };
        assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
    }
}
