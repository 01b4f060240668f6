use serde::{Deserialize, Serialize};

use super::kalman::ArmaFilter;
use super::optim::{bfgs, Differences};
use super::poly;
use super::{ArimaOrder, FittedModel, ModelKind};
use crate::error::{Error, Result};
use crate::series::{difference_values, seasonal_difference_values, TimeSeries};

/// Optimiser settings for maximum-likelihood estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    pub gtol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            gtol: 1e-8,
        }
    }
}

/// Estimates a univariate ARIMA model.
pub fn fit_arima(series: &TimeSeries, order: &ArimaOrder) -> Result<FittedModel> {
    fit_with(series, &[], order, &FitOptions::default())
}

/// Estimates a regression with ARIMA errors. The regression and ARMA
/// coefficients are estimated jointly on the differenced target and
/// differenced covariates.
pub fn fit_regarima(target: &TimeSeries, covariates: &[TimeSeries], order: &ArimaOrder) -> Result<FittedModel> {
    fit_with(target, covariates, order, &FitOptions::default())
}

pub(crate) fn differenced(values: &[f64], order: &ArimaOrder) -> Vec<f64> {
    let w = difference_values(values, order.d);
    if order.seasonal_d > 0 {
        seasonal_difference_values(&w, order.period, order.seasonal_d)
    } else {
        w
    }
}

/// The concentrated likelihood of one model on one data set.
pub(crate) struct Problem {
    pub order: ArimaOrder,
    pub w: Vec<f64>,
    /// Differenced regressors followed by the constant column, if any.
    pub regs: Vec<Vec<f64>>,
}

pub(crate) struct Profile {
    pub loglik: f64,
    pub sigma2: f64,
    pub beta: Vec<f64>,
    pub degenerate: bool,
}

pub(crate) struct Coefficients {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub sar: Vec<f64>,
    pub sma: Vec<f64>,
}

impl Coefficients {
    pub fn full(&self, period: usize) -> (Vec<f64>, Vec<f64>) {
        (
            poly::expand_ar(&self.ar, &self.sar, period),
            poly::expand_ma(&self.ma, &self.sma, period),
        )
    }
}

impl Problem {
    pub fn new(target: &[f64], regressors: &[&[f64]], order: &ArimaOrder) -> Self {
        let w = differenced(target, order);
        let mut regs: Vec<Vec<f64>> = regressors.iter().map(|r| differenced(r, order)).collect();
        if order.constant {
            regs.push(vec![1.0; w.len()]);
        }
        Self {
            order: *order,
            w,
            regs,
        }
    }

    pub fn coefficients(&self, raw: &[f64]) -> Coefficients {
        let o = &self.order;
        let (ar, rest) = raw.split_at(o.p);
        let (ma, rest) = rest.split_at(o.q);
        let (sar, sma) = rest.split_at(o.seasonal_p);
        Coefficients {
            ar: poly::raw_to_ar(ar),
            ma: poly::raw_to_ma(ma),
            sar: poly::raw_to_ar(sar),
            sma: poly::raw_to_ma(sma),
        }
    }

    pub fn filter(&self, raw: &[f64]) -> Result<ArmaFilter> {
        let (phi, theta) = self.coefficients(raw).full(self.order.period);
        ArmaFilter::new(&phi, &theta)
    }

    /// Log-likelihood with the regression coefficients (GLS) and the
    /// innovation variance concentrated out.
    pub fn profile(&self, raw: &[f64]) -> Result<Profile> {
        let filter = self.filter(raw)?;
        let k = self.regs.len();
        let mut series: Vec<&[f64]> = Vec::with_capacity(k + 1);
        series.push(&self.w);
        series.extend(self.regs.iter().map(|r| r.as_slice()));
        let mut xtx = vec![0.0; k * k];
        let mut xty = vec![0.0; k];
        let mut yty = 0.0;
        let out = filter.run(&series, |_, wv| {
            let y = wv[0];
            yty += y * y;
            for i in 0..k {
                let xi = wv[1 + i];
                xty[i] += xi * y;
                for j in 0..=i {
                    xtx[i * k + j] += xi * wv[1 + j];
                }
            }
        })?;
        let beta = cholesky_solve(&mut xtx, &xty, k)?;
        let explained: f64 = beta.iter().zip(&xty).map(|(b, c)| b * c).sum();
        let rss = yty - explained;
        let n = self.w.len() as f64;
        if rss <= 1e-12 * yty || yty == 0.0 {
            return Ok(Profile {
                loglik: f64::INFINITY,
                sigma2: 0.0,
                beta,
                degenerate: true,
            });
        }
        let sigma2 = rss / n;
        let loglik = -0.5 * n * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0) - 0.5 * out.sum_ln_f;
        Ok(Profile {
            loglik,
            sigma2,
            beta,
            degenerate: false,
        })
    }

    /// Conditional-sum-of-squares innovation variance, with the regression
    /// coefficients concentrated out. The first `len(phi)` innovations are
    /// conditioned on and pre-sample innovations are zero.
    pub fn css_sigma2(&self, raw: &[f64]) -> Result<f64> {
        let (phi, theta) = self.coefficients(raw).full(self.order.period);
        let start = phi.len();
        let n = self.w.len();
        if n <= start + self.regs.len() {
            return Err(Error::Length {
                needed: start + self.regs.len() + 1,
                got: n,
            });
        }
        let k = self.regs.len();
        let q = theta.len();
        let m = n - start;
        // Innovations of each series, preceded by q zero pre-sample values.
        let filtered: Vec<Vec<f64>> = std::iter::once(&self.w)
            .chain(&self.regs)
            .map(|s| {
                let mut e = vec![0.0; q + m];
                for t in 0..m {
                    let ar: f64 = phi.iter().zip(s[t..t + start].iter().rev()).map(|(f, v)| f * v).sum();
                    let ma: f64 = theta.iter().zip(e[t..t + q].iter().rev()).map(|(th, v)| th * v).sum();
                    e[q + t] = s[start + t] - ar - ma;
                }
                e.drain(..q);
                e
            })
            .collect();
        let y = &filtered[0];
        let yty: f64 = y.iter().map(|v| v * v).sum();
        let mut xtx = vec![0.0; k * k];
        let mut xty = vec![0.0; k];
        for i in 0..k {
            let xi = &filtered[1 + i];
            xty[i] = xi.iter().zip(y).map(|(a, b)| a * b).sum();
            for j in 0..=i {
                xtx[i * k + j] = xi.iter().zip(&filtered[1 + j]).map(|(a, b)| a * b).sum();
            }
        }
        let beta = cholesky_solve(&mut xtx, &xty, k)?;
        let rss = yty - beta.iter().zip(&xty).map(|(b, c)| b * c).sum::<f64>();
        if !rss.is_finite() || rss <= 1e-12 * yty || yty == 0.0 {
            return Err(Error::ZeroVariance("conditional sum of squares vanishes".into()));
        }
        Ok(rss / (n - start) as f64)
    }

    /// Regression-adjusted differenced series `w - X beta`.
    pub fn adjusted(&self, beta: &[f64]) -> Vec<f64> {
        let mut eta = self.w.clone();
        for (reg, b) in self.regs.iter().zip(beta) {
            for (e, x) in eta.iter_mut().zip(reg) {
                *e -= b * x;
            }
        }
        eta
    }
}

/// Solves `A x = b` for symmetric positive definite `A` given by its lower
/// triangle, reporting collinearity when a pivot collapses.
fn cholesky_solve(a: &mut [f64], b: &[f64], k: usize) -> Result<Vec<f64>> {
    let diag: Vec<f64> = (0..k).map(|i| a[i * k + i]).collect();
    for j in 0..k {
        let mut s = a[j * k + j];
        for m in 0..j {
            s -= a[j * k + m] * a[j * k + m];
        }
        if !(s > 1e-10 * diag[j]) || diag[j] <= 0.0 {
            return Err(Error::Collinear(format!("regressor {} is constant or collinear", j + 1)));
        }
        let l = s.sqrt();
        a[j * k + j] = l;
        for i in j + 1..k {
            let mut s = a[i * k + j];
            for m in 0..j {
                s -= a[i * k + m] * a[j * k + m];
            }
            a[i * k + j] = s / l;
        }
    }
    let mut y = vec![0.0; k];
    for i in 0..k {
        let s: f64 = (0..i).map(|m| a[i * k + m] * y[m]).sum();
        y[i] = (b[i] - s) / a[i * k + i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|m| a[m * k + i] * x[m]).sum();
        x[i] = (y[i] - s) / a[i * k + i];
    }
    Ok(x)
}

/// A ranking proxy only needs the criterion to a few decimals.
const CSS_GTOL: f64 = 1e-5;

fn prepare(target: &TimeSeries, covariates: &[TimeSeries], order: &ArimaOrder) -> Result<(Problem, usize)> {
    order.validate()?;
    for c in covariates {
        if c.index() != target.index() {
            return Err(Error::Index(format!(
                "covariate '{}' does not share the target index",
                c.name()
            )));
        }
    }
    let regressors: Vec<&[f64]> = covariates.iter().map(|c| c.values()).collect();
    let problem = Problem::new(target.values(), &regressors, order);
    let n_params = order.n_arma() + problem.regs.len() + 1;
    if target.len() <= order.diff_len() || problem.w.len() < 10 + n_params {
        return Err(Error::Length {
            needed: 10 + n_params + order.diff_len(),
            got: target.len(),
        });
    }
    Ok((problem, n_params))
}

/// Usable starting point: `start` if it has the right dimension, else zeros.
fn initial_point(start: Option<&[f64]>, n_arma: usize) -> Vec<f64> {
    match start {
        Some(x) if x.len() == n_arma && x.iter().all(|v| v.is_finite()) => x.to_vec(),
        _ => vec![0.0; n_arma],
    }
}

/// Corrected AIC of a conditional-sum-of-squares fit, using the innovation
/// variance on the full effective sample so that candidates with the same
/// differencing are comparable. Cheap proxy used to rank orders. Returns the
/// criterion and the unconstrained ARMA parameters at the optimum.
pub(crate) fn css_aicc(
    target: &TimeSeries,
    covariates: &[TimeSeries],
    order: &ArimaOrder,
    opts: &FitOptions,
    start: Option<&[f64]>,
) -> Result<(f64, Vec<f64>)> {
    let (problem, n_params) = prepare(target, covariates, order)?;
    let n_arma = order.n_arma();
    let n_eff = problem.w.len();
    let (sigma2, raw) = if n_arma == 0 {
        (problem.css_sigma2(&[])?, Vec::new())
    } else {
        let objective = |raw: &[f64]| match problem.css_sigma2(raw) {
            Ok(s) => 0.5 * s.ln(),
            Err(_) => f64::INFINITY,
        };
        let mut x0 = initial_point(start, n_arma);
        if !objective(&x0).is_finite() {
            x0 = vec![0.0; n_arma];
        }
        let min = bfgs(objective, x0, opts.max_iter, CSS_GTOL.max(opts.gtol), Differences::Forward);
        if !min.fx.is_finite() {
            return Err(Error::ZeroVariance("conditional sum of squares vanishes".into()));
        }
        if poly::at_boundary(&min.x) {
            return Ok((f64::INFINITY, min.x));
        }
        ((2.0 * min.fx).exp(), min.x)
    };
    let n = n_eff as f64;
    let k = n_params as f64;
    let aic = n * sigma2.ln() + 2.0 * k;
    let aicc = if n - k - 1.0 > 0.0 {
        aic + 2.0 * k * (k + 1.0) / (n - k - 1.0)
    } else {
        f64::INFINITY
    };
    Ok((aicc, raw))
}

/// Estimates a (regression with) ARIMA model by exact maximum likelihood.
pub fn fit_with(
    target: &TimeSeries,
    covariates: &[TimeSeries],
    order: &ArimaOrder,
    opts: &FitOptions,
) -> Result<FittedModel> {
    fit_from(target, covariates, order, opts, None).map(|(m, _)| m)
}

/// [`fit_with`] started from the unconstrained parameters `start`. Also
/// returns the unconstrained parameters at the optimum.
pub(crate) fn fit_from(
    target: &TimeSeries,
    covariates: &[TimeSeries],
    order: &ArimaOrder,
    opts: &FitOptions,
    start: Option<&[f64]>,
) -> Result<(FittedModel, Vec<f64>)> {
    let (problem, n_params) = prepare(target, covariates, order)?;
    let n_arma = order.n_arma();
    let n_eff = problem.w.len();

    let zeros = vec![0.0; n_arma];
    let initial = problem.profile(&zeros)?;
    let (raw, iterations) = if initial.degenerate || n_arma == 0 {
        (zeros, 0)
    } else {
        let n = n_eff as f64;
        let objective = |raw: &[f64]| match problem.profile(raw) {
            Ok(p) if !p.degenerate && p.loglik.is_finite() => -p.loglik / n,
            _ => f64::INFINITY,
        };
        let mut x0 = initial_point(start, n_arma);
        if !objective(&x0).is_finite() {
            x0 = zeros;
        }
        let min = bfgs(objective, x0, opts.max_iter, opts.gtol, Differences::Central);
        if !min.converged {
            return Err(Error::Convergence {
                iterations: min.iterations,
                best_loglik: -min.fx * n,
                grad_norm: min.grad_norm,
            });
        }
        (min.x, min.iterations)
    };

    let profile = if raw.iter().all(|v| *v == 0.0) {
        initial
    } else {
        problem.profile(&raw)?
    };
    let coefs = problem.coefficients(&raw);
    let (phi, theta) = coefs.full(order.period);
    let boundary = poly::at_boundary(&raw) || poly::near_unit_root(&phi, &theta);
    let first = order.diff_len();
    let resid_index = target.index()[first..].to_vec();
    let residuals = if profile.degenerate {
        vec![0.0; n_eff]
    } else {
        let eta = problem.adjusted(&profile.beta);
        let mut out = Vec::with_capacity(n_eff);
        problem.filter(&raw)?.run(&[&eta], |_, wv| out.push(wv[0]))?;
        out
    };
    let (aic, aicc, bic) = FittedModel::information_criteria(profile.loglik, n_params, n_eff);
    let n_reg = covariates.len();
    let intercept = order.constant.then(|| profile.beta[n_reg]);
    let model = FittedModel {
        kind: if covariates.is_empty() { ModelKind::Arima } else { ModelKind::RegArima },
        order: *order,
        ar: coefs.ar,
        ma: coefs.ma,
        seasonal_ar: coefs.sar,
        seasonal_ma: coefs.sma,
        reg_names: covariates.iter().map(|c| c.name().to_owned()).collect(),
        reg_coeffs: profile.beta[..n_reg].to_vec(),
        intercept,
        sigma2: profile.sigma2,
        loglik: profile.loglik,
        aic,
        aicc,
        bic,
        n_params,
        n_eff,
        residuals: TimeSeries::new(target.name(), resid_index, residuals)?,
        degenerate: profile.degenerate,
        boundary,
        iterations,
        regressors: covariates.iter().map(|c| c.values().to_vec()).collect(),
        n_obs: target.len(),
    };
    Ok((model, raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn ts(name: &str, v: Vec<f64>) -> TimeSeries {
        TimeSeries::from_start(name, "2012-01-01".parse().unwrap(), v).unwrap()
    }

    #[test]
    fn mean_model_reduces_to_sample_moments() {
        let x: Vec<f64> = normals(1000, 1).into_iter().map(|v| 3.0 + 2.0 * v).collect();
        let m = fit_arima(&ts("x", x.clone()), &ArimaOrder::new(0, 0, 0).with_constant(true)).unwrap();
        let mean = x.iter().sum::<f64>() / 1000.0;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 1000.0;
        assert!((m.intercept.unwrap() - mean).abs() < 1e-9);
        assert!((m.sigma2 / var - 1.0).abs() < 0.02);
        assert_eq!(m.n_params, 2);
        assert_eq!(m.residuals.len(), 1000);
    }

    #[test]
    fn zero_covariate_is_collinear() {
        let y = ts("y", normals(200, 2));
        let zero = ts("z", vec![0.0; 200]);
        let err = fit_regarima(&y, &[zero], &ArimaOrder::new(1, 0, 0)).unwrap_err();
        assert!(matches!(err, Error::Collinear(_)), "{err:?}");
    }

    #[test]
    fn too_short_is_a_length_error() {
        let y = ts("y", normals(12, 3));
        assert!(matches!(
            fit_arima(&y, &ArimaOrder::new(2, 1, 2)),
            Err(Error::Length { .. })
        ));
    }

    #[test]
    fn constant_series_is_degenerate() {
        let y = ts("y", vec![1.5; 60]);
        let m = fit_arima(&y, &ArimaOrder::new(0, 0, 0).with_constant(true)).unwrap();
        assert!(m.degenerate);
    }

    #[test]
    fn iteration_cap_reports_convergence_error() {
        let e = normals(400, 4);
        let mut x = vec![0.0; 400];
        for t in 1..400 {
            x[t] = 0.7 * x[t - 1] + e[t] + 0.4 * e[t - 1];
        }
        let opts = FitOptions { max_iter: 1, gtol: 1e-12 };
        let err = fit_with(&ts("x", x), &[], &ArimaOrder::new(2, 0, 2), &opts).unwrap_err();
        assert!(matches!(err, Error::Convergence { iterations: 1, .. }), "{err:?}");
    }
}
