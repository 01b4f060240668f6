//! Synthetic panels with a known data-generating process.

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Panel, TimeSeries};

/// How the covariate drives the target.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `y_t = y_{t-1} + beta (x_{t-1} - x_{t-2}) + e_t`: the target is
    /// `beta x_{t-1}` plus a random walk, a regression with ARIMA(0,1,0) errors.
    #[default]
    Increment,
    /// `y_t = y_{t-1} + beta x_{t-1} + e_t`: the covariate level moves the
    /// target's increments.
    Level,
}

/// Parameters of a simulated panel. The covariate is
/// `x_t = mean + phi (x_{t-1} - mean) + u_t`, `u_t ~ N(0, covariate_sd^2)`,
/// started from its stationary distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimSpec {
    pub t: usize,
    pub beta: f64,
    pub innovation_sd: f64,
    pub covariate_phi: f64,
    pub covariate_sd: f64,
    pub covariate_mean: f64,
    pub coupling: Coupling,
    /// Independent covariates with the same law as the driving one.
    pub n_noise: usize,
    pub start_level: f64,
    /// Innovation standard deviation grows linearly to
    /// `innovation_sd * (1 + variance_growth)` at the last observation.
    pub variance_growth: f64,
    pub start_date: NaiveDate,
    pub seed: u64,
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            t: 636,
            beta: 0.8,
            innovation_sd: 0.005,
            covariate_phi: 0.5,
            covariate_sd: covariate_sd_for_r2(0.8, 0.005, 0.5, 0.05, Coupling::Increment),
            covariate_mean: 0.0,
            coupling: Coupling::Increment,
            n_noise: 0,
            start_level: 1.3,
            variance_growth: 0.0,
            start_date: NaiveDate::from_ymd_opt(2012, 9, 1).expect("valid date"),
            seed: 1,
        }
    }
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        if self.t < 50 {
            return Err(Error::Config(format!("simulated length {} is below 50", self.t)));
        }
        if !(self.innovation_sd > 0.0) || !self.innovation_sd.is_finite() {
            return Err(Error::Config(format!("innovation_sd must be positive, got {}", self.innovation_sd)));
        }
        if !(self.covariate_phi.abs() < 1.0) {
            return Err(Error::Config(format!("covariate_phi {} is not stationary", self.covariate_phi)));
        }
        if !(self.covariate_sd >= 0.0) || !self.beta.is_finite() || !(self.variance_growth >= 0.0) {
            return Err(Error::Config("covariate_sd, beta or variance_growth out of range".into()));
        }
        Ok(())
    }
}

/// Covariate innovation standard deviation at which the covariate term
/// explains a fraction `r2` of the variance of the target's one-step change.
pub fn covariate_sd_for_r2(beta: f64, innovation_sd: f64, phi: f64, r2: f64, coupling: Coupling) -> f64 {
    if beta == 0.0 || r2 <= 0.0 {
        return innovation_sd;
    }
    let signal = innovation_sd * innovation_sd * r2 / (1.0 - r2);
    // variance of x (Level) or of its first difference (Increment) per unit innovation variance
    let per_unit = match coupling {
        Coupling::Level => 1.0 / (1.0 - phi * phi),
        Coupling::Increment => 2.0 / (1.0 + phi),
    };
    (signal / (beta * beta * per_unit)).sqrt()
}

/// Simulates a target named `y`, the driving covariate `x` and noise
/// covariates `noise1`, `noise2`, ... Deterministic given `spec`.
pub fn simulate_panel(spec: &SimSpec) -> Result<Panel> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    let n = spec.t;
    let stationary_sd = spec.covariate_sd / (1.0 - spec.covariate_phi * spec.covariate_phi).sqrt();
    let ar1 = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut x = Vec::with_capacity(n);
        let mut dev = stationary_sd * std.sample(rng);
        for _ in 0..n {
            x.push(spec.covariate_mean + dev);
            dev = spec.covariate_phi * dev + spec.covariate_sd * std.sample(rng);
        }
        x
    };
    let x = ar1(&mut rng);
    let mut y = Vec::with_capacity(n);
    y.push(spec.start_level);
    for t in 1..n {
        let scale = 1.0 + spec.variance_growth * t as f64 / (n - 1) as f64;
        let signal = match spec.coupling {
            Coupling::Increment if t >= 2 => spec.beta * (x[t - 1] - x[t - 2]),
            Coupling::Increment => 0.0,
            Coupling::Level => spec.beta * (x[t - 1] - spec.covariate_mean),
        };
        y.push(y[t - 1] + signal + spec.innovation_sd * scale * std.sample(&mut rng));
    }
    let mut covariates = vec![TimeSeries::from_start("x", spec.start_date, x)?];
    for i in 1..=spec.n_noise {
        covariates.push(TimeSeries::from_start(format!("noise{i}"), spec.start_date, ar1(&mut rng))?);
    }
    Panel::new(TimeSeries::from_start("y", spec.start_date, y)?, covariates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_shaped() {
        let spec = SimSpec { n_noise: 2, ..Default::default() };
        let a = simulate_panel(&spec).unwrap();
        assert_eq!(a, simulate_panel(&spec).unwrap());
        assert_eq!(a.len(), 636);
        assert_eq!(a.covariate_names(), vec!["x", "noise1", "noise2"]);
        let b = simulate_panel(&SimSpec { seed: 2, ..spec }).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn invalid_specs() {
        assert!(simulate_panel(&SimSpec { t: 49, ..Default::default() }).is_err());
        assert!(simulate_panel(&SimSpec { innovation_sd: 0.0, ..Default::default() }).is_err());
        assert!(simulate_panel(&SimSpec { covariate_phi: 1.0, ..Default::default() }).is_err());
    }

    #[test]
    fn increment_signal_share() {
        let spec = SimSpec { t: 20_000, ..Default::default() };
        let p = simulate_panel(&spec).unwrap();
        let y = p.target().values();
        let x = p.covariates()[0].values();
        let (mut signal, mut total) = (0.0, 0.0);
        for t in 2..y.len() {
            let s = spec.beta * (x[t - 1] - x[t - 2]);
            signal += s * s;
            total += (y[t] - y[t - 1]).powi(2);
        }
        let share = signal / total;
        assert!((share - 0.05).abs() < 0.01, "signal share {share}");
    }

    #[test]
    fn zero_beta_is_a_random_walk() {
        let spec = SimSpec { beta: 0.0, t: 20_000, ..Default::default() };
        let p = simulate_panel(&spec).unwrap();
        let y = p.target().values();
        let var = y.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / (y.len() - 1) as f64;
        assert!((var / 2.5e-5 - 1.0).abs() < 0.05, "increment variance {var}");
    }
}
