//! Random walk, ARIMA and regression-with-ARIMA-errors models: exact
//! maximum-likelihood estimation, automatic order selection and one-step
//! forecasting.

mod fit;
mod forecast;
mod kalman;
mod optim;
pub(crate) mod poly;
mod select;

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{difference, TimeSeries};

pub use fit::{fit_arima, fit_regarima, fit_with, FitOptions};
pub use forecast::forecast_one_step;
pub use poly::root_moduli;
pub use select::{auto_fit, auto_fit_warm, auto_select_order, ndiffs, seasonal_strength, SelectionConfig, WarmStart};

/// Orders of a (seasonal) ARIMA model and whether it carries a constant.
///
/// With `d + D = 0` the constant is a mean; with `d + D = 1` it is a drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    /// Seasonal period; 0 disables the seasonal part.
    pub period: usize,
    pub seasonal_p: usize,
    pub seasonal_d: usize,
    pub seasonal_q: usize,
    pub constant: bool,
}

impl ArimaOrder {
    pub const fn new(p: usize, d: usize, q: usize) -> Self {
        Self {
            p,
            d,
            q,
            period: 0,
            seasonal_p: 0,
            seasonal_d: 0,
            seasonal_q: 0,
            constant: false,
        }
    }

    pub const fn with_constant(mut self, constant: bool) -> Self {
        self.constant = constant;
        self
    }

    pub const fn with_seasonal(mut self, period: usize, p: usize, d: usize, q: usize) -> Self {
        self.period = period;
        self.seasonal_p = p;
        self.seasonal_d = d;
        self.seasonal_q = q;
        self
    }

    /// Number of ARMA coefficients.
    pub fn n_arma(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q
    }

    /// Observations consumed by differencing.
    pub fn diff_len(&self) -> usize {
        self.d + self.seasonal_d * self.period
    }

    pub fn validate(&self) -> Result<()> {
        if self.d + self.seasonal_d > 3 {
            return Err(Error::Input(format!("{self}: total differencing exceeds 3")));
        }
        let seasonal = self.seasonal_p + self.seasonal_d + self.seasonal_q;
        if seasonal > 0 && self.period < 2 {
            return Err(Error::Input(format!("{self}: seasonal terms need a period of at least 2")));
        }
        if self.constant && self.d + self.seasonal_d > 1 {
            return Err(Error::Input(format!("{self}: constant not identified with d + D > 1")));
        }
        Ok(())
    }
}

impl fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ARIMA({},{},{})", self.p, self.d, self.q)?;
        if self.period > 0 && self.seasonal_p + self.seasonal_d + self.seasonal_q > 0 {
            write!(
                f,
                "({},{},{})[{}]",
                self.seasonal_p, self.seasonal_d, self.seasonal_q, self.period
            )?;
        }
        if self.constant {
            f.write_str(if self.d + self.seasonal_d == 0 { " with mean" } else { " with drift" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    RandomWalk,
    Arima,
    RegArima,
}

/// An estimated model.
///
/// `n_params` counts ARMA coefficients, regression coefficients (including
/// the constant) and the innovation variance. Residuals are on the
/// differenced scale, one per effective observation.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub kind: ModelKind,
    pub order: ArimaOrder,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub seasonal_ar: Vec<f64>,
    pub seasonal_ma: Vec<f64>,
    pub reg_names: Vec<String>,
    pub reg_coeffs: Vec<f64>,
    pub intercept: Option<f64>,
    pub sigma2: f64,
    pub loglik: f64,
    pub aic: f64,
    pub aicc: f64,
    pub bic: f64,
    pub n_params: usize,
    pub n_eff: usize,
    pub residuals: TimeSeries,
    /// Zero innovation variance; likelihood and information criteria are infinite.
    pub degenerate: bool,
    /// Some coefficient sits on the stationarity or invertibility boundary.
    pub boundary: bool,
    pub iterations: usize,
    /// Undifferenced regressor values over the estimation sample.
    pub(crate) regressors: Vec<Vec<f64>>,
    pub(crate) n_obs: usize,
}

impl FittedModel {
    pub(crate) fn information_criteria(loglik: f64, n_params: usize, n_eff: usize) -> (f64, f64, f64) {
        let k = n_params as f64;
        let n = n_eff as f64;
        let aic = -2.0 * loglik + 2.0 * k;
        let bic = -2.0 * loglik + n.ln() * k;
        let aicc = if n - k - 1.0 > 0.0 {
            aic + 2.0 * k * (k + 1.0) / (n - k - 1.0)
        } else {
            f64::INFINITY
        };
        (aic, aicc, bic)
    }

    /// Number of estimated ARMA coefficients, as used for portmanteau degrees of freedom.
    pub fn n_arma(&self) -> usize {
        self.order.n_arma()
    }
}

/// A point forecast one step past `origin_date`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub point: f64,
    pub horizon: usize,
    pub origin_date: NaiveDate,
}

/// Random walk without drift: the residuals are the first differences and the
/// only parameter is the innovation variance.
pub fn fit_random_walk(series: &TimeSeries) -> Result<FittedModel> {
    if series.len() < 2 {
        return Err(Error::Length {
            needed: 2,
            got: series.len(),
        });
    }
    let residuals = difference(series, 1)?;
    let n_eff = residuals.len();
    let sigma2 = residuals.values().iter().map(|e| e * e).sum::<f64>() / n_eff as f64;
    let degenerate = sigma2 <= 0.0;
    let loglik = if degenerate {
        f64::INFINITY
    } else {
        -0.5 * n_eff as f64 * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0)
    };
    let n_params = 1;
    let (aic, aicc, bic) = FittedModel::information_criteria(loglik, n_params, n_eff);
    Ok(FittedModel {
        kind: ModelKind::RandomWalk,
        order: ArimaOrder::new(0, 1, 0),
        ar: vec![],
        ma: vec![],
        seasonal_ar: vec![],
        seasonal_ma: vec![],
        reg_names: vec![],
        reg_coeffs: vec![],
        intercept: None,
        sigma2,
        loglik,
        aic,
        aicc,
        bic,
        n_params,
        n_eff,
        residuals,
        degenerate,
        boundary: false,
        iterations: 0,
        regressors: vec![],
        n_obs: series.len(),
    })
}
