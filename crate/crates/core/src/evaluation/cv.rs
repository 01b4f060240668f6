use serde::{Deserialize, Serialize};
use tracing::debug;

use super::{make_noise_covariate, task_seed, RaceConfig, RAND_NAME, RW_NAME};
use crate::arima::{auto_fit_warm, fit_random_walk, forecast_one_step, ArimaOrder, FittedModel, WarmStart};
use crate::diagnostics::{run_battery, BatteryConfig, DiagnosticBattery, GateTest};
use crate::error::{Error, Result};
use crate::series::{Panel, TimeSeries};

/// Shortest supported estimation window.
pub(crate) const MIN_WINDOW: usize = 60;

/// One estimation window of one arm: the fit, its one-step forecast of the
/// target at `origin_index + 1` and the random-walk forecast from the same
/// window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    /// Covariate name, or the random walk arm's reserved name.
    pub covariate_name: String,
    pub r: usize,
    pub origin_index: usize,
    /// `None` when the window is skipped.
    pub forecast: Option<f64>,
    pub actual: f64,
    pub skipped: bool,
    pub skip_reason: Option<String>,
    /// Information criteria of the fitted model, when one was estimated.
    pub aic: Option<f64>,
    pub bic: Option<f64>,
    pub order: Option<ArimaOrder>,
    pub rw_forecast: f64,
    /// Residual battery; absent for the random walk arm and for windows
    /// whose model could not be estimated.
    pub battery: Option<DiagnosticBattery>,
}

impl WindowResult {
    /// Forecast error `actual - forecast` of a non-skipped window.
    pub fn error(&self) -> Option<f64> {
        self.forecast.filter(|_| !self.skipped).map(|f| self.actual - f)
    }

    pub fn rw_error(&self) -> f64 {
        self.actual - self.rw_forecast
    }
}

/// Rolling-origin fixed-window cross-validation of one arm at window length
/// `r`: one window per origin `t = r - 1 ..= T - 2`, so `T - r` forecasts are
/// attempted.
///
/// `covariate` selects a panel covariate, the noise covariate (generated from
/// `config.seed` when the panel has none) or, with `None`, the random walk
/// arm. Windows are processed in order so that each fit can start from the
/// previous window's estimates.
pub fn rolling_cv(panel: &Panel, covariate: Option<&str>, r: usize, config: &RaceConfig) -> Result<Vec<WindowResult>> {
    let t = panel.len();
    if r >= t {
        return Err(Error::Config(format!("window length {r} is not below T = {t}")));
    }
    if config.horizon != 1 {
        return Err(Error::Config(format!("horizon {} is not supported, only 1", config.horizon)));
    }
    let generated;
    let cov = match covariate {
        None => None,
        Some(name) => match panel.covariate(name) {
            Some(c) => Some(c),
            None if name == RAND_NAME => {
                generated = make_noise_covariate(panel, config.seed)?;
                Some(&generated)
            }
            None => return Err(Error::Config(format!("unknown covariate '{name}'"))),
        },
    };
    run_chain(panel.target(), cov, r, config)
}

pub(crate) fn run_chain(
    target: &TimeSeries,
    cov: Option<&TimeSeries>,
    r: usize,
    config: &RaceConfig,
) -> Result<Vec<WindowResult>> {
    if r < MIN_WINDOW + config.covariate_lag {
        return Err(Error::Config(format!(
            "window length {r} is below the minimum {}",
            MIN_WINDOW + config.covariate_lag
        )));
    }
    let n = target.len();
    let mut warm = WarmStart::default();
    let mut out = Vec::with_capacity(n - r);
    for t in r - 1..n - 1 {
        let window = match cov {
            None => rw_window(target, r, t),
            Some(x) => {
                if !config.warm_start {
                    warm = WarmStart::default();
                }
                covariate_window(target, x, r, t, config, &mut warm)?
            }
        };
        if let Some(reason) = &window.skip_reason {
            debug!(arm = %window.covariate_name, r, origin = t, reason, "window skipped");
        }
        out.push(window);
    }
    Ok(out)
}

fn rw_window(target: &TimeSeries, r: usize, t: usize) -> WindowResult {
    let y = target.values();
    let mut result = WindowResult {
        covariate_name: RW_NAME.to_string(),
        r,
        origin_index: t,
        forecast: Some(y[t]),
        actual: y[t + 1],
        skipped: false,
        skip_reason: None,
        aic: None,
        bic: None,
        order: None,
        rw_forecast: y[t],
        battery: None,
    };
    match fit_random_walk(&target.slice(t + 1 - r, t + 1)) {
        Ok(m) if !m.degenerate => {
            result.aic = Some(m.aic);
            result.bic = Some(m.bic);
            result.order = Some(m.order);
        }
        Ok(_) => skip(&mut result, "degenerate: constant window".into()),
        Err(e) => skip(&mut result, format!("error: {e}")),
    }
    result
}

fn covariate_window(
    target: &TimeSeries,
    x: &TimeSeries,
    r: usize,
    t: usize,
    config: &RaceConfig,
    warm: &mut WarmStart,
) -> Result<WindowResult> {
    let lag = config.covariate_lag;
    let y = target.values();
    let xv = x.values();
    let start = (t + 1 - r).max(lag);
    let window = target.slice(start, t + 1);
    let regressor = TimeSeries::new(x.name(), window.index().to_vec(), xv[start - lag..t + 1 - lag].to_vec())?;
    let mut result = WindowResult {
        covariate_name: x.name().to_string(),
        r,
        origin_index: t,
        forecast: None,
        actual: y[t + 1],
        skipped: false,
        skip_reason: None,
        aic: None,
        bic: None,
        order: None,
        rw_forecast: y[t],
        battery: None,
    };
    let model = match auto_fit_warm(&window, std::slice::from_ref(&regressor), &config.selection, warm) {
        Ok(m) => m,
        Err(e) => {
            skip(&mut result, fit_failure(&e));
            return Ok(result);
        }
    };
    result.aic = Some(model.aic);
    result.bic = Some(model.bic);
    result.order = Some(model.order);
    if model.degenerate {
        skip(&mut result, "degenerate: zero innovation variance".into());
        return Ok(result);
    }
    let battery_config = BatteryConfig {
        fitdf: model.n_arma(),
        white_seed: task_seed(config.seed, x.name(), r, t),
        ..config.battery.clone()
    };
    match run_battery(model.residuals.values(), &battery_config) {
        Ok(b) => {
            result.battery = Some(b);
            if b.anomaly {
                skip(&mut result, anomaly_reason(&b, &battery_config));
                return Ok(result);
            }
        }
        Err(e) => {
            skip(&mut result, format!("diagnostics: {e}"));
            return Ok(result);
        }
    }
    match forecast(&model, &window, xv[t + 1 - lag]) {
        Ok(f) if f.is_finite() => result.forecast = Some(f),
        Ok(_) => skip(&mut result, "forecast: non-finite".into()),
        Err(e) => skip(&mut result, format!("forecast: {e}")),
    }
    Ok(result)
}

fn forecast(model: &FittedModel, window: &TimeSeries, x_next: f64) -> Result<f64> {
    Ok(forecast_one_step(model, window, &[x_next])?.point)
}

fn skip(result: &mut WindowResult, reason: String) {
    result.skipped = true;
    result.forecast = None;
    result.skip_reason = Some(reason);
}

fn fit_failure(e: &Error) -> String {
    match e {
        Error::Convergence { .. } => format!("convergence: {e}"),
        Error::Selection(_) => format!("selection: {e}"),
        Error::Collinear(_) => format!("collinear: {e}"),
        Error::ZeroVariance(_) => format!("degenerate: {e}"),
        _ => format!("error: {e}"),
    }
}

fn anomaly_reason(b: &DiagnosticBattery, config: &BatteryConfig) -> String {
    let names: Vec<&str> = config
        .gate
        .iter()
        .filter(|g| b.flags(**g, config.alpha_gate))
        .map(|g| match g {
            GateTest::LjungBox => "ljung_box",
            GateTest::Kpss => "kpss",
            GateTest::Adf => "adf",
            GateTest::PhillipsPerron => "phillips_perron",
            GateTest::WhiteNn => "white_nn",
        })
        .collect();
    format!("anomaly: {}", names.join(","))
}
