//! Command-line interface: `ingest`, `tune`, `backtest`, `explain`,
//! `report` and `simulate`.

pub mod config;
pub mod pipeline;
pub mod report;

use std::path::PathBuf;

use clap::{ArgAction, Parser, Subcommand};

use crate::error::Result;
use crate::month::MonthStamp;
use crate::simulate::SimulationConfig;
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "rewardrisk", version, about = "Reward and risk forecasts for market timing")]
pub struct Cli {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set gammas=[4]`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load raw files and build the predictor panels.
    Ingest,
    /// Score the tuning grids over the validation window.
    Tune,
    /// Walk-forward forecasts, strategies and evaluation tables.
    Backtest,
    /// Kernel SHAP attributions for one model.
    Explain {
        /// `family:return` or `family:volatility`.
        #[arg(long)]
        model: String,
        #[arg(long)]
        from: Option<MonthStamp>,
        #[arg(long)]
        to: Option<MonthStamp>,
    },
    /// Print the stored backtest report.
    Report,
    /// Print the resolved configuration as TOML.
    ShowConfig,
    /// Write simulated monthly and daily inputs plus a matching config.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        months: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    if let Command::Simulate { out, months, seed } = &cli.command {
        let sim = SimulationConfig {
            months: *months,
            seed: *seed,
            ..SimulationConfig::default()
        };
        let path = pipeline::cmd_simulate(out, &sim)?;
        println!("wrote {}", path.display());
        return Ok(());
    }
    let config = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    pipeline::with_threads(&config, || dispatch(cli, &config))?
}

fn dispatch(cli: &Cli, config: &RunConfig) -> Result<()> {
    match &cli.command {
        Command::Ingest => {
            let m = pipeline::cmd_ingest(config)?;
            println!(
                "return panel {} rows {}..{}; volatility panel {} rows {}..{}",
                m.return_panel.rows,
                m.return_panel.first,
                m.return_panel.last,
                m.volatility_panel.rows,
                m.volatility_panel.first,
                m.volatility_panel.last
            );
        }
        Command::Tune => {
            let tuned = pipeline::cmd_tune(config)?;
            for (target, results) in [("return", &tuned.returns), ("volatility", &tuned.volatility)] {
                for r in results {
                    println!(
                        "{target} {}: candidate {} (R2 {:.4})",
                        r.family.as_str(),
                        r.best_index,
                        r.best_r_squared
                    );
                }
            }
        }
        Command::Backtest => {
            let report = pipeline::cmd_backtest(config)?;
            println!("{}", report.render());
        }
        Command::Explain { model, from, to } => {
            let s = pipeline::cmd_explain(config, model, *from, *to)?;
            println!("feature,mean_phi,mean_abs_phi");
            for (i, f) in s.features.iter().enumerate() {
                println!("{f},{},{}", s.mean_phi[i], s.mean_abs_phi[i]);
            }
        }
        Command::Report => print!("{}", pipeline::cmd_report(config)?),
        Command::ShowConfig => print!("{}", config.to_toml()?),
        Command::Simulate { .. } => unreachable!("handled before configuration"),
    }
    Ok(())
}
