use serde::{Deserialize, Serialize};

use super::{chi2_sf, TestName, TestResult};
use crate::error::{Error, Result};
use crate::regression::{design, ols};

const MIN_LEN: usize = 30;

/// Residuals whose squares are tested for a time trend in variance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BpBase {
    /// Residuals of a linear time-trend fit to the levels.
    #[default]
    TrendResiduals,
    /// First differences of the series.
    Differences,
}

/// Breusch-Pagan test (Koenker's studentized form) for variance trending
/// with time, on linear time-trend residuals.
pub fn breusch_pagan(series: &[f64]) -> Result<TestResult> {
    breusch_pagan_with(series, BpBase::TrendResiduals)
}

pub fn breusch_pagan_with(series: &[f64], base: BpBase) -> Result<TestResult> {
    if series.len() < MIN_LEN {
        return Err(Error::Length { needed: MIN_LEN, got: series.len() });
    }
    let resid = match base {
        BpBase::TrendResiduals => {
            let n = series.len();
            let ones = vec![1.0; n];
            let t: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let rss_total: f64 = {
                let m = series.iter().sum::<f64>() / n as f64;
                series.iter().map(|v| (v - m).powi(2)).sum()
            };
            if !(rss_total > 0.0) {
                return Err(Error::ZeroVariance("Breusch-Pagan on a constant series".into()));
            }
            ols(series, &design(&[&ones, &t]))?.residuals
        }
        BpBase::Differences => series.windows(2).map(|w| w[1] - w[0]).collect(),
    };
    let n = resid.len();
    let sq: Vec<f64> = resid.iter().map(|e| e * e).collect();
    let m = sq.iter().sum::<f64>() / n as f64;
    if !(sq.iter().any(|v| (v - m).abs() > 1e-300)) {
        return Err(Error::ZeroVariance("squared residuals are constant".into()));
    }
    let ones = vec![1.0; n];
    let t: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let aux = ols(&sq, &design(&[&ones, &t]))?;
    let stat = n as f64 * aux.r_squared;
    Ok(TestResult {
        test_name: TestName::BreuschPagan,
        statistic: stat,
        p_value: chi2_sf(stat, 1),
        lags_or_df: 1,
    })
}
