use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

const MIN_LEN: usize = 10;

/// Normal Q-Q plot coordinates with 95% pointwise bands on the sample scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqData {
    pub sample_quantiles: Vec<f64>,
    pub theoretical_quantiles: Vec<f64>,
    pub band_lower: Vec<f64>,
    pub band_upper: Vec<f64>,
}

/// Sorted residuals against standard normal quantiles at `(i - 0.5) / n`.
/// Bands use the asymptotic variance `p (1 - p) / (n f(q)^2)` of an order
/// statistic, scaled by the sample mean and standard deviation.
pub fn qq_data(residuals: &[f64]) -> Result<QqData> {
    let n = residuals.len();
    if n < MIN_LEN {
        return Err(Error::Length { needed: MIN_LEN, got: n });
    }
    if residuals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite residual".into()));
    }
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mean = sorted.iter().sum::<f64>() / nf;
    let sd = (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    let mut theoretical = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for i in 0..n {
        let p = (i as f64 + 0.5) / nf;
        let q = std.inverse_cdf(p);
        let se = (p * (1.0 - p) / nf).sqrt() / std.pdf(q);
        theoretical.push(q);
        lower.push(mean + sd * (q - 1.96 * se));
        upper.push(mean + sd * (q + 1.96 * se));
    }
    Ok(QqData {
        sample_quantiles: sorted,
        theoretical_quantiles: theoretical,
        band_lower: lower,
        band_upper: upper,
    })
}
