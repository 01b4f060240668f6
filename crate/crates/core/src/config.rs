//! Run configuration: every setting of a horse race run, loadable from TOML.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::arima::SelectionConfig;
use crate::diagnostics::{BatteryConfig, BpBase, GateTest};
use crate::error::{Error, Result};
use crate::evaluation::RaceConfig;

/// Preprocessing switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Transforms {
    /// Log-transform the target when Breusch-Pagan rejects at `alpha_gate`.
    pub log_gate: bool,
    pub bp_base: BpBase,
    pub near_zero_variance: bool,
    pub freq_ratio_cutoff: f64,
    /// Percent of distinct values below which a covariate can be removed.
    pub unique_pct_cutoff: f64,
}

impl Default for Transforms {
    fn default() -> Self {
        Self {
            log_gate: true,
            bp_base: BpBase::Differences,
            near_zero_variance: true,
            freq_ratio_cutoff: 19.0,
            unique_pct_cutoff: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// CSV with columns `date,value`.
    pub target_path: Option<PathBuf>,
    /// Wide CSV with columns `date,<name1>,<name2>,...`.
    pub covariates_path: Option<PathBuf>,
    pub window_grid: Vec<usize>,
    pub horizon: usize,
    pub max_p: usize,
    pub max_q: usize,
    pub seasonal_period: usize,
    pub alpha_gate: f64,
    pub alpha_report: f64,
    pub seed: u64,
    pub covariate_lag: usize,
    pub transforms: Transforms,
    /// Largest tolerated fraction of skipped windows.
    pub skip_budget: f64,
    pub warm_start: bool,
    pub approximation: bool,
    pub gate: Vec<GateTest>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let race = RaceConfig::default();
        Self {
            target_path: None,
            covariates_path: None,
            window_grid: race.window_grid,
            horizon: race.horizon,
            max_p: race.selection.max_p,
            max_q: race.selection.max_q,
            seasonal_period: race.selection.seasonal_period,
            alpha_gate: race.battery.alpha_gate,
            alpha_report: race.alpha_report,
            seed: race.seed,
            covariate_lag: race.covariate_lag,
            transforms: Transforms::default(),
            skip_budget: 0.02,
            warm_start: race.warm_start,
            approximation: race.selection.approximation,
            gate: race.battery.gate,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn race_config(&self) -> RaceConfig {
        RaceConfig {
            window_grid: self.window_grid.clone(),
            horizon: self.horizon,
            covariate_lag: self.covariate_lag,
            alpha_report: self.alpha_report,
            seed: self.seed,
            warm_start: self.warm_start,
            selection: SelectionConfig {
                max_p: self.max_p,
                max_q: self.max_q,
                seasonal_period: self.seasonal_period,
                approximation: self.approximation,
                ..SelectionConfig::default()
            },
            battery: BatteryConfig {
                alpha_gate: self.alpha_gate,
                gate: self.gate.clone(),
                ..BatteryConfig::default()
            },
        }
    }

    /// Checks the configuration against a panel of `t` observations.
    pub fn validate(&self, t: usize) -> Result<()> {
        self.race_config().validate(t)?;
        if !(0.0..=1.0).contains(&self.skip_budget) {
            return Err(Error::Config(format!("skip_budget {} outside [0, 1]", self.skip_budget)));
        }
        if self.transforms.freq_ratio_cutoff <= 0.0 || self.transforms.unique_pct_cutoff <= 0.0 {
            return Err(Error::Config("near-zero-variance cutoffs must be positive".into()));
        }
        Ok(())
    }
}

/// Parses `start:end:step` (inclusive end) or a comma-separated list.
pub fn parse_window_grid(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("invalid window grid '{spec}'"));
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    let grid: Vec<usize> = match parts.as_slice() {
        [start, end, step] => {
            let (start, end, step) = (parse(start)?, parse(end)?, parse(step)?);
            if step == 0 || end < start {
                return Err(bad());
            }
            (start..=end).step_by(step).collect()
        }
        [list] => list.split(',').map(parse).collect::<Result<_>>()?,
        _ => return Err(bad()),
    };
    if grid.is_empty() {
        return Err(bad());
    }
    Ok(grid)
}
