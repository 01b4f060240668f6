//! Residual diagnostics: portmanteau, unit-root, stationarity, neglected
//! nonlinearity and heteroscedasticity tests, collinearity measures,
//! Bonferroni adjustment and Q-Q plot data.

mod collinearity;
mod heteroscedasticity;
mod nonlinearity;
mod portmanteau;
mod qq;
mod unit_root;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use collinearity::vif;
pub use heteroscedasticity::{breusch_pagan, breusch_pagan_with, BpBase};
pub use nonlinearity::white_nn_test;
pub use portmanteau::{default_lags, ljung_box};
pub use qq::{qq_data, QqData};
pub use unit_root::{adf, kpss, phillips_perron, AdfLag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestName {
    LjungBox,
    Kpss,
    Adf,
    PhillipsPerron,
    WhiteNn,
    BreuschPagan,
}

/// Outcome of one hypothesis test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test_name: TestName,
    pub statistic: f64,
    pub p_value: f64,
    /// Lag truncation or degrees of freedom, depending on the test.
    pub lags_or_df: usize,
}

impl TestResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

/// Which tests can flag a window as anomalous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateTest {
    /// Ljung-Box rejects independence.
    LjungBox,
    /// KPSS rejects stationarity.
    Kpss,
    /// ADF fails to reject a unit root.
    Adf,
    /// Phillips-Perron fails to reject a unit root.
    PhillipsPerron,
    /// White test rejects linearity.
    WhiteNn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatteryConfig {
    /// Ljung-Box lag count; `None` uses `min(10, n / 5)`.
    pub lb_lags: Option<usize>,
    /// Degrees of freedom removed from the Ljung-Box reference distribution.
    pub fitdf: usize,
    pub adf_lag: AdfLag,
    pub white_hidden: usize,
    pub white_seed: u64,
    pub alpha_gate: f64,
    pub gate: Vec<GateTest>,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            lb_lags: None,
            fitdf: 0,
            adf_lag: AdfLag::Fixed,
            white_hidden: 2,
            white_seed: 0,
            alpha_gate: 0.01,
            gate: vec![GateTest::LjungBox, GateTest::Adf, GateTest::PhillipsPerron],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticBattery {
    pub ljung_box: TestResult,
    pub kpss: TestResult,
    pub adf: TestResult,
    pub phillips_perron: TestResult,
    pub white_nn: TestResult,
    pub anomaly: bool,
}

impl DiagnosticBattery {
    /// Whether `test` flags an anomaly at level `alpha`.
    pub fn flags(&self, test: GateTest, alpha: f64) -> bool {
        match test {
            GateTest::LjungBox => self.ljung_box.rejects(alpha),
            GateTest::Kpss => self.kpss.rejects(alpha),
            GateTest::Adf => !self.adf.rejects(alpha),
            GateTest::PhillipsPerron => !self.phillips_perron.rejects(alpha),
            GateTest::WhiteNn => self.white_nn.rejects(alpha),
        }
    }
}

/// Runs all five residual tests and evaluates the anomaly gate.
pub fn run_battery(residuals: &[f64], config: &BatteryConfig) -> Result<DiagnosticBattery> {
    if residuals.is_empty() {
        return Err(Error::Length { needed: 50, got: 0 });
    }
    let lags = config.lb_lags.unwrap_or_else(|| default_lags(residuals.len()));
    let mut battery = DiagnosticBattery {
        ljung_box: ljung_box(residuals, lags, config.fitdf)?,
        kpss: kpss(residuals)?,
        adf: adf(residuals, config.adf_lag)?,
        phillips_perron: phillips_perron(residuals)?,
        white_nn: white_nn_test(residuals, config.white_hidden, config.white_seed)?,
        anomaly: false,
    };
    battery.anomaly = config.gate.iter().any(|t| battery.flags(*t, config.alpha_gate));
    Ok(battery)
}

/// Bonferroni adjustment `min(1, m p)`.
pub fn bonferroni_adjust(p_values: &[f64], m: usize) -> Result<Vec<f64>> {
    if m < p_values.len() || m == 0 {
        return Err(Error::Input(format!(
            "Bonferroni multiplier {m} is smaller than the number of p-values {}",
            p_values.len()
        )));
    }
    p_values
        .iter()
        .map(|&p| {
            if (0.0..=1.0).contains(&p) {
                Ok((m as f64 * p).min(1.0))
            } else {
                Err(Error::Input(format!("p-value {p} outside [0, 1]")))
            }
        })
        .collect()
}

/// Piecewise-linear interpolation with constant extrapolation; `xs` ascending.
pub(crate) fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.partition_point(|v| *v <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}

pub(crate) fn chi2_sf(stat: f64, df: usize) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let dist = ChiSquared::new(df.max(1) as f64).expect("positive degrees of freedom");
    dist.sf(stat.max(0.0)).clamp(0.0, 1.0)
}
