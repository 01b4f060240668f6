use super::{chi2_sf, TestName, TestResult};
use crate::error::{Error, Result};
use crate::stats::autocovariances;

/// Default Ljung-Box lag count `min(10, n / 5)`, at least 1.
pub fn default_lags(n: usize) -> usize {
    (n / 5).clamp(1, 10)
}

/// Ljung-Box portmanteau test with `n_lags` autocorrelations. The reference
/// chi-square has `max(1, n_lags - fitdf)` degrees of freedom.
pub fn ljung_box(residuals: &[f64], n_lags: usize, fitdf: usize) -> Result<TestResult> {
    let n = residuals.len();
    if n_lags == 0 {
        return Err(Error::Input("Ljung-Box needs at least one lag".into()));
    }
    if n <= n_lags {
        return Err(Error::Length { needed: n_lags + 1, got: n });
    }
    let gamma = autocovariances(residuals, n_lags);
    if !(gamma[0] > 0.0) {
        return Err(Error::ZeroVariance("Ljung-Box on constant residuals".into()));
    }
    let nf = n as f64;
    let q = nf
        * (nf + 2.0)
        * (1..=n_lags)
            .map(|l| (gamma[l] / gamma[0]).powi(2) / (nf - l as f64))
            .sum::<f64>();
    let df = n_lags.saturating_sub(fitdf).max(1);
    Ok(TestResult {
        test_name: TestName::LjungBox,
        statistic: q,
        p_value: chi2_sf(q, df),
        lags_or_df: df,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_series_by_hand() {
        let x = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        // mean 0, gamma0 = 1, gamma1 = -7/8, r1 = -0.875
        let q_hand = 8.0 * 10.0 * 0.875f64.powi(2) / 7.0;
        let r = ljung_box(&x, 1, 0).unwrap();
        assert!((r.statistic - q_hand).abs() < 1e-12);
        assert!(r.p_value < 0.05);
    }

    #[test]
    fn affine_invariance() {
        let x: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 - 0.3 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| -3.0 * v + 7.0).collect();
        let a = ljung_box(&x, 5, 0).unwrap();
        let b = ljung_box(&y, 5, 0).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-9 * a.statistic.max(1.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(ljung_box(&[1.0; 20], 3, 0), Err(Error::ZeroVariance(_))));
        assert!(matches!(ljung_box(&[1.0, 2.0], 3, 0), Err(Error::Length { .. })));
        assert_eq!(default_lags(636), 10);
        assert_eq!(default_lags(30), 6);
    }
}
