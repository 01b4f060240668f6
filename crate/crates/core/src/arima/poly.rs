//! Lag polynomials and the partial-autocorrelation reparameterisation.

use nalgebra::DMatrix;

/// Partial autocorrelations are capped here so that every mapped polynomial
/// keeps its roots strictly outside the unit circle.
pub(crate) const PACF_LIMIT: f64 = 0.9999;

/// A coefficient whose partial autocorrelation exceeds this is reported as
/// sitting on the stationarity/invertibility boundary.
pub(crate) const BOUNDARY_PACF: f64 = 0.999;

pub(crate) fn squash(raw: f64) -> f64 {
    raw.tanh().clamp(-PACF_LIMIT, PACF_LIMIT)
}

/// Maps unconstrained values to the coefficients `phi` of a stationary
/// polynomial `1 - phi_1 B - ... - phi_p B^p` via partial autocorrelations.
pub(crate) fn raw_to_ar(raw: &[f64]) -> Vec<f64> {
    let p = raw.len();
    let mut phi = vec![0.0; p];
    let mut prev = vec![0.0; p];
    for k in 0..p {
        let r = squash(raw[k]);
        prev[..k].copy_from_slice(&phi[..k]);
        for j in 0..k {
            phi[j] = prev[j] - r * prev[k - 1 - j];
        }
        phi[k] = r;
    }
    phi
}

/// Inverse of [`raw_to_ar`]; `None` if `phi` is not strictly stationary.
#[cfg(test)]
pub(crate) fn ar_to_raw(phi: &[f64]) -> Option<Vec<f64>> {
    let p = phi.len();
    let mut a = phi.to_vec();
    let mut raw = vec![0.0; p];
    for k in (0..p).rev() {
        let r = a[k];
        if !(r.abs() < 1.0) {
            return None;
        }
        raw[k] = r.clamp(-PACF_LIMIT, PACF_LIMIT).atanh();
        let denom = 1.0 - r * r;
        let prev = a.clone();
        for j in 0..k {
            a[j] = (prev[j] + r * prev[k - 1 - j]) / denom;
        }
    }
    Some(raw)
}

/// Same transform for an invertible MA polynomial `1 + theta_1 B + ...`.
pub(crate) fn raw_to_ma(raw: &[f64]) -> Vec<f64> {
    raw_to_ar(raw).into_iter().map(|v| -v).collect()
}

/// Roots closer to the unit circle than this count as boundary solutions.
pub(crate) const BOUNDARY_ROOT: f64 = 1.0 + 1e-6;

/// Whether any partial autocorrelation produced by `raw` is at the boundary.
pub(crate) fn at_boundary(raw: &[f64]) -> bool {
    raw.iter().any(|r| squash(*r).abs() > BOUNDARY_PACF)
}

/// Whether `1 - sum phi_i B^i` or `1 + sum theta_i B^i` has a root on or
/// within `BOUNDARY_ROOT` of the unit circle.
pub(crate) fn near_unit_root(phi: &[f64], theta: &[f64]) -> bool {
    let neg: Vec<f64> = phi.iter().map(|v| -v).collect();
    root_moduli(&neg)
        .into_iter()
        .chain(root_moduli(theta))
        .any(|m| !(m > BOUNDARY_ROOT))
}

/// Full polynomial coefficients `c` of `1 + c_1 B + c_2 B^2 + ...` (leading 1 omitted).
pub(crate) fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut full_a = vec![1.0];
    full_a.extend_from_slice(a);
    let mut full_b = vec![1.0];
    full_b.extend_from_slice(b);
    let mut out = vec![0.0; full_a.len() + full_b.len() - 1];
    for (i, x) in full_a.iter().enumerate() {
        for (j, y) in full_b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out.remove(0);
    out
}

/// Spreads seasonal coefficients onto lags `period, 2*period, ...`.
pub(crate) fn spread(coeffs: &[f64], period: usize) -> Vec<f64> {
    let mut out = vec![0.0; coeffs.len() * period];
    for (i, c) in coeffs.iter().enumerate() {
        out[(i + 1) * period - 1] = *c;
    }
    out
}

/// AR coefficients of `(1 - sum phi B^i)(1 - sum Phi B^(s i))`, returned as `phi_full`.
pub(crate) fn expand_ar(ar: &[f64], sar: &[f64], period: usize) -> Vec<f64> {
    let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
    let prod = multiply(&neg(ar), &neg(&spread(sar, period)));
    prod.into_iter().map(|x| -x).collect()
}

/// MA coefficients of `(1 + sum theta B^i)(1 + sum Theta B^(s i))`.
pub(crate) fn expand_ma(ma: &[f64], sma: &[f64], period: usize) -> Vec<f64> {
    multiply(ma, &spread(sma, period))
}

/// Coefficients `c_i` with `(1 - B)^d (1 - B^s)^D = 1 + sum c_i B^i`.
pub(crate) fn differencing_polynomial(d: usize, period: usize, seasonal_d: usize) -> Vec<f64> {
    let mut poly: Vec<f64> = Vec::new();
    for _ in 0..d {
        poly = multiply(&poly, &[-1.0]);
    }
    for _ in 0..seasonal_d {
        poly = multiply(&poly, &spread(&[-1.0], period));
    }
    poly
}

/// Moduli of the roots of `1 + c_1 z + ... + c_k z^k`.
pub fn root_moduli(coeffs: &[f64]) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    while c.last().is_some_and(|v| *v == 0.0) {
        c.pop();
    }
    let k = c.len();
    if k == 0 {
        return Vec::new();
    }
    // Roots of the reversed polynomial z^k + c_1 z^(k-1) + ... + c_k are the
    // reciprocals of the roots we want.
    let companion = DMatrix::from_fn(k, k, |i, j| {
        if i == 0 {
            -c[j]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    companion
        .complex_eigenvalues()
        .iter()
        .map(|z| 1.0 / z.norm())
        .collect()
}
