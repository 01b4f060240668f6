//! The forecast horse race: rolling-origin fixed-window cross-validation,
//! loss metrics, information-criterion tables, the noise covariate baseline,
//! predictability rankings and mode votes.

mod cv;
mod metrics;
mod noise;
mod race;

use serde::{Deserialize, Serialize};

use crate::arima::SelectionConfig;
use crate::diagnostics::BatteryConfig;
use crate::error::{Error, Result};

pub use cv::{rolling_cv, WindowResult};
pub use metrics::{
    avg_predictability, delta_scale, delta_scale_sparse, mae, mode_vote, msfe, named_ranks, rank_difference, VoteCell,
};
pub use noise::make_noise_covariate;
pub use race::{
    run_horse_race, HorseRaceReport, InformationRow, PredictabilityRow, RwSplit, SkippedWindow, SplitDiagnostics,
    SplitMetrics, SplitSummary, VoteCounts,
};

/// Reserved name of the noise covariate.
pub const RAND_NAME: &str = "Rand";
/// Reserved name of the random walk arm.
pub const RW_NAME: &str = "RW";

/// Settings of a horse race.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RaceConfig {
    /// Estimation window lengths, ascending.
    pub window_grid: Vec<usize>,
    /// Forecast horizon; only 1 is supported.
    pub horizon: usize,
    /// The covariate enters the regression as `x_{t - covariate_lag}`.
    pub covariate_lag: usize,
    pub alpha_report: f64,
    pub seed: u64,
    /// Start each window's optimiser at the previous window's estimates.
    pub warm_start: bool,
    pub selection: SelectionConfig,
    /// Residual battery; `fitdf` and `white_seed` are set per window.
    pub battery: BatteryConfig,
}

impl Default for RaceConfig {
    fn default() -> Self {
        Self {
            window_grid: (310..=620).step_by(10).collect(),
            horizon: 1,
            covariate_lag: 1,
            alpha_report: 0.05,
            seed: 42,
            warm_start: true,
            selection: SelectionConfig::default(),
            battery: BatteryConfig::default(),
        }
    }
}

impl RaceConfig {
    /// Checks the configuration against a panel of `t` observations.
    pub fn validate(&self, t: usize) -> Result<()> {
        if self.horizon != 1 {
            return Err(Error::Config(format!("horizon {} is not supported, only 1", self.horizon)));
        }
        if self.window_grid.is_empty() {
            return Err(Error::Config("empty window grid".into()));
        }
        if self.window_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("window grid must be strictly ascending".into()));
        }
        if let Some(&r) = self.window_grid.iter().find(|&&r| r >= t) {
            return Err(Error::Config(format!("window length {r} is not below T = {t}")));
        }
        if !(self.alpha_report > 0.0 && self.alpha_report < 1.0) {
            return Err(Error::Config(format!("alpha_report {} outside (0, 1)", self.alpha_report)));
        }
        if !(self.battery.alpha_gate > 0.0 && self.battery.alpha_gate < 1.0) {
            return Err(Error::Config(format!("alpha_gate {} outside (0, 1)", self.battery.alpha_gate)));
        }
        Ok(())
    }
}

/// Stable 64-bit FNV-1a hash of a task's identity, used to derive per-task
/// seeds that do not depend on scheduling.
pub(crate) fn task_seed(seed: u64, name: &str, r: usize, origin: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for b in bytes {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    feed(&seed.to_le_bytes());
    feed(name.as_bytes());
    feed(&[0xff]);
    feed(&(r as u64).to_le_bytes());
    feed(&(origin as u64).to_le_bytes());
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_32_windows() {
        let c = RaceConfig::default();
        assert_eq!(c.window_grid.len(), 32);
        assert_eq!(c.window_grid[0], 310);
        assert_eq!(*c.window_grid.last().unwrap(), 620);
        c.validate(636).unwrap();
        assert!(c.validate(620).is_err());
    }

    #[test]
    fn rejects_bad_grids() {
        let mut c = RaceConfig { window_grid: vec![320, 310], ..Default::default() };
        assert!(matches!(c.validate(636), Err(Error::Config(_))));
        c.window_grid = vec![];
        assert!(c.validate(636).is_err());
        c.window_grid = vec![310];
        c.horizon = 2;
        assert!(c.validate(636).is_err());
    }

    #[test]
    fn task_seeds_are_stable_and_distinct() {
        assert_eq!(task_seed(1, "a", 2, 3), task_seed(1, "a", 2, 3));
        assert_ne!(task_seed(1, "a", 2, 3), task_seed(1, "a", 2, 4));
        assert_ne!(task_seed(1, "a", 2, 3), task_seed(2, "a", 2, 3));
        assert_ne!(task_seed(1, "ab", 2, 3), task_seed(1, "a", 2, 3));
    }
}
