use serde::{Deserialize, Serialize};

use super::{interpolate, TestName, TestResult};
use crate::error::{Error, Result};
use crate::regression::{design, ols};

const MIN_LEN: usize = 30;

/// Lag policy for the augmented Dickey-Fuller regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdfLag {
    /// `trunc((n - 1)^(1/3))` lagged differences.
    Fixed,
    /// Minimum AIC over `0..=trunc((n - 1)^(1/3))` on a common sample.
    Aic,
}

fn check_len(n: usize) -> Result<()> {
    if n < MIN_LEN {
        return Err(Error::Length { needed: MIN_LEN, got: n });
    }
    Ok(())
}

// Critical values of the KPSS level statistic.
const KPSS_CRIT: [f64; 4] = [0.347, 0.463, 0.574, 0.739];
const KPSS_P: [f64; 4] = [0.10, 0.05, 0.025, 0.01];

/// KPSS test of level stationarity with a Bartlett-kernel long-run variance
/// and Hobijn-Franses-Ooms automatic bandwidth. The p-value is interpolated
/// in the critical-value table and therefore lies in `[0.01, 0.10]`.
pub fn kpss(series: &[f64]) -> Result<TestResult> {
    let n = series.len();
    check_len(n)?;
    let m = series.iter().sum::<f64>() / n as f64;
    let e: Vec<f64> = series.iter().map(|v| v - m).collect();
    let s0: f64 = e.iter().map(|v| v * v).sum();
    if !(s0 > 0.0) {
        return Err(Error::ZeroVariance("KPSS on a constant series".into()));
    }
    let lags = kpss_bandwidth(&e).min(n - 1);
    let mut lrv = s0;
    for l in 1..=lags {
        let g: f64 = e[l..].iter().zip(&e[..n - l]).map(|(a, b)| a * b).sum();
        lrv += 2.0 * g * (1.0 - l as f64 / (lags as f64 + 1.0));
    }
    lrv /= n as f64;
    let mut partial = 0.0;
    let mut eta = 0.0;
    for v in &e {
        partial += v;
        eta += partial * partial;
    }
    let stat = eta / (n as f64 * n as f64) / lrv;
    Ok(TestResult {
        test_name: TestName::Kpss,
        statistic: stat,
        p_value: interpolate(&KPSS_CRIT, &KPSS_P, stat),
        lags_or_df: lags,
    })
}

fn kpss_bandwidth(e: &[f64]) -> usize {
    let n = e.len();
    let nf = n as f64;
    let cov_lags = nf.powf(2.0 / 9.0) as usize;
    let mut s0 = e.iter().map(|v| v * v).sum::<f64>() / nf;
    let mut s1 = 0.0;
    for i in 1..=cov_lags.min(n - 1) {
        let prod = e[i..].iter().zip(&e[..n - i]).map(|(a, b)| a * b).sum::<f64>() / (nf / 2.0);
        s0 += prod;
        s1 += i as f64 * prod;
    }
    let s_hat = s1 / s0;
    let gamma = 1.1447 * (s_hat * s_hat).powf(1.0 / 3.0);
    let lags = gamma * nf.powf(1.0 / 3.0);
    if lags.is_finite() && lags > 0.0 {
        lags as usize
    } else {
        0
    }
}

// Dickey-Fuller tau distribution (constant and trend): rows are sample sizes,
// columns the tail probabilities.
const DF_T: [f64; 6] = [25.0, 50.0, 100.0, 250.0, 500.0, 100_000.0];
const DF_P: [f64; 8] = [0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99];
const DF_TABLE: [[f64; 6]; 8] = [
    [-4.38, -4.15, -4.04, -3.99, -3.98, -3.96],
    [-3.95, -3.80, -3.73, -3.69, -3.68, -3.66],
    [-3.60, -3.50, -3.45, -3.43, -3.42, -3.41],
    [-3.24, -3.18, -3.15, -3.13, -3.13, -3.12],
    [-1.14, -1.19, -1.22, -1.23, -1.24, -1.25],
    [-0.80, -0.87, -0.90, -0.92, -0.93, -0.94],
    [-0.50, -0.58, -0.62, -0.64, -0.65, -0.66],
    [-0.15, -0.24, -0.28, -0.31, -0.32, -0.33],
];

/// p-value of a Dickey-Fuller tau statistic, interpolated first over the
/// sample size and then over the statistic; clamped to `[0.01, 0.99]`.
fn df_p_value(stat: f64, n: usize) -> f64 {
    let at_n: Vec<f64> = DF_TABLE.iter().map(|row| interpolate(&DF_T, row, n as f64)).collect();
    interpolate(&at_n, &DF_P, stat)
}

/// Augmented Dickey-Fuller test with constant and linear trend.
pub fn adf(series: &[f64], lag: AdfLag) -> Result<TestResult> {
    let n_obs = series.len();
    check_len(n_obs)?;
    let max_k = ((n_obs - 1) as f64).powf(1.0 / 3.0) as usize;
    let k = match lag {
        AdfLag::Fixed => max_k,
        AdfLag::Aic => {
            let mut best = (f64::INFINITY, 0);
            for k in 0..=max_k {
                let fit = adf_regression(series, k, max_k)?;
                let n = fit.1 as f64;
                let aic = n * (fit.0.rss / n).ln() + 2.0 * (k + 3) as f64;
                if aic < best.0 {
                    best = (aic, k);
                }
            }
            best.1
        }
    };
    let (fit, _) = adf_regression(series, k, k)?;
    let stat = fit.coefficients[1] / fit.std_errors[1];
    let n = n_obs - 1;
    Ok(TestResult {
        test_name: TestName::Adf,
        statistic: stat,
        p_value: df_p_value(stat, n),
        lags_or_df: k,
    })
}

/// Regresses `dy_t` on `(1, y_{t-1}, t, dy_{t-1..t-k})` using observations
/// from `skip` lags on so that different `k` share a sample.
fn adf_regression(x: &[f64], k: usize, skip: usize) -> Result<(crate::regression::Ols, usize)> {
    let dy: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let start = skip;
    let rows = dy.len() - start;
    let resp: Vec<f64> = dy[start..].to_vec();
    let ones = vec![1.0; rows];
    let level: Vec<f64> = (start..dy.len()).map(|t| x[t]).collect();
    let trend: Vec<f64> = (start..dy.len()).map(|t| (t + 1) as f64).collect();
    let lagged: Vec<Vec<f64>> = (1..=k).map(|j| (start..dy.len()).map(|t| dy[t - j]).collect()).collect();
    let mut cols: Vec<&[f64]> = vec![&ones, &level, &trend];
    cols.extend(lagged.iter().map(|c| c.as_slice()));
    let fit = ols(&resp, &design(&cols))?;
    if !(fit.rss > 0.0) {
        return Err(Error::ZeroVariance("unit-root regression fits exactly".into()));
    }
    Ok((fit, rows))
}

/// Phillips-Perron `Z(t_alpha)` test with constant and trend and a short
/// Bartlett truncation `trunc(4 (n / 100)^(1/4))`.
pub fn phillips_perron(series: &[f64]) -> Result<TestResult> {
    check_len(series.len())?;
    let yt: Vec<f64> = series[1..].to_vec();
    let yt1: Vec<f64> = series[..series.len() - 1].to_vec();
    let n = yt.len();
    let nf = n as f64;
    let ones = vec![1.0; n];
    let tt: Vec<f64> = (1..=n).map(|i| i as f64 - nf / 2.0).collect();
    let fit = ols(&yt, &design(&[&ones, &tt, &yt1]))?;
    let tstat = (fit.coefficients[2] - 1.0) / fit.std_errors[2];
    let u = &fit.residuals;
    let ssqru = u.iter().map(|v| v * v).sum::<f64>() / nf;
    if !(ssqru > 0.0) {
        return Err(Error::ZeroVariance("unit-root regression fits exactly".into()));
    }
    let l = (4.0 * (nf / 100.0).powf(0.25)) as usize;
    let mut acc = 0.0;
    for i in 1..=l.min(n - 1) {
        let s: f64 = u[i..].iter().zip(&u[..n - i]).map(|(a, b)| a * b).sum();
        acc += s * (1.0 - i as f64 / (l as f64 + 1.0));
    }
    let ssqrtl = ssqru + 2.0 * acc / nf;
    let n2 = nf * nf;
    let sum_y1: f64 = yt1.iter().sum();
    let sum_y1sq: f64 = yt1.iter().map(|v| v * v).sum();
    let sum_ty1: f64 = yt1.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).sum();
    let dx = n2 * (n2 - 1.0) * sum_y1sq / 12.0 - nf * sum_ty1 * sum_ty1 + nf * (nf + 1.0) * sum_ty1 * sum_y1
        - nf * (nf + 1.0) * (2.0 * nf + 1.0) * sum_y1 * sum_y1 / 6.0;
    if !(dx > 0.0 && ssqrtl > 0.0) {
        return Err(Error::ZeroVariance("degenerate Phillips-Perron correction".into()));
    }
    let stat = (ssqru / ssqrtl).sqrt() * tstat
        - nf.powi(3) / (4.0 * 3f64.sqrt() * dx.sqrt() * ssqrtl.sqrt()) * (ssqrtl - ssqru);
    Ok(TestResult {
        test_name: TestName::PhillipsPerron,
        statistic: stat,
        p_value: df_p_value(stat, n),
        lags_or_df: l,
    })
}
