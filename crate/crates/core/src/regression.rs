//! Small least-squares helper shared by the test statistics.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct Ols {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    /// Uncentered when the design has no intercept column, centered otherwise.
    pub r_squared: f64,
}

/// Builds an `n x k` design matrix from columns.
pub(crate) fn design(columns: &[&[f64]]) -> DMatrix<f64> {
    let n = columns.first().map_or(0, |c| c.len());
    DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i])
}

/// Ordinary least squares by Householder QR. The first column is treated as an
/// intercept when it is constant.
pub(crate) fn ols(y: &[f64], x: &DMatrix<f64>) -> Result<Ols> {
    let (n, k) = x.shape();
    if n != y.len() {
        return Err(Error::Input(format!("design has {n} rows, response {}", y.len())));
    }
    if n <= k {
        return Err(Error::Length { needed: k + 1, got: n });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..k).any(|i| r[(i, i)].abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE)) || scale == 0.0 {
        return Err(Error::Collinear("design matrix is rank deficient".into()));
    }
    let yv = DVector::from_column_slice(y);
    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Collinear("singular triangular factor".into()))?;
    let fitted = x * &beta;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();

    let has_intercept = k > 0 && x.column(0).iter().all(|&v| v == x[(0, 0)]) && x[(0, 0)] != 0.0;
    let tss = if has_intercept {
        let m = y.iter().sum::<f64>() / n as f64;
        y.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
    } else {
        y.iter().map(|v| v * v).sum::<f64>()
    };
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };

    let sigma2 = rss / (n - k) as f64;
    let rinv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Collinear("singular triangular factor".into()))?;
    let std_errors = (0..k)
        .map(|i| (sigma2 * rinv.row(i).iter().map(|v| v * v).sum::<f64>()).sqrt())
        .collect();
    Ok(Ols {
        coefficients: beta.iter().copied().collect(),
        std_errors,
        residuals,
        rss,
        r_squared,
    })
}
