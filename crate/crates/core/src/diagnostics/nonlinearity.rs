use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{chi2_sf, TestName, TestResult};
use crate::error::{Error, Result};

const MIN_LEN: usize = 50;

/// Neural-network test for neglected nonlinearity.
///
/// The standardized series is regressed on a constant and its first lag. The
/// residuals are then tested against `n_hidden` logistic activations of
/// randomly weighted lags, with weights drawn from `U[-2, 2]` using `seed`.
/// Activations are orthogonalized against the linear part; the statistic
/// `n R^2` is chi-square with one degree of freedom per retained activation.
pub fn white_nn_test(series: &[f64], n_hidden: usize, seed: u64) -> Result<TestResult> {
    let n_obs = series.len();
    if n_obs < MIN_LEN {
        return Err(Error::Length { needed: MIN_LEN, got: n_obs });
    }
    if n_hidden == 0 {
        return Err(Error::Input("White test needs at least one hidden unit".into()));
    }
    let mean = series.iter().sum::<f64>() / n_obs as f64;
    let sd = (series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n_obs as f64).sqrt();
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance("White test on a constant series".into()));
    }
    let z: Vec<f64> = series.iter().map(|v| (v - mean) / sd).collect();
    let y = &z[1..];
    let lag = &z[..n_obs - 1];
    let n = y.len();

    let mut basis: Vec<Vec<f64>> = Vec::new();
    push_orthogonal(&mut basis, vec![1.0; n]);
    push_orthogonal(&mut basis, lag.to_vec());
    let mut u = y.to_vec();
    for b in &basis {
        let c = dot(&u, b);
        u.iter_mut().zip(b).for_each(|(v, w)| *v -= c * w);
    }
    let uu = dot(&u, &u);
    if !(uu > 0.0) {
        return Err(Error::ZeroVariance("linear part explains the series exactly".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let linear = basis.len();
    for _ in 0..n_hidden {
        let bias: f64 = rng.gen_range(-2.0..=2.0);
        let slope: f64 = rng.gen_range(-2.0..=2.0);
        let act = lag
            .iter()
            .map(|v| 1.0 / (1.0 + (-(bias + slope * v)).exp()) - 0.5)
            .collect();
        push_orthogonal(&mut basis, act);
    }
    let kept = basis.len() - linear;
    if kept == 0 {
        return Ok(TestResult {
            test_name: TestName::WhiteNn,
            statistic: 0.0,
            p_value: 1.0,
            lags_or_df: 0,
        });
    }
    let explained: f64 = basis[linear..].iter().map(|b| dot(&u, b).powi(2)).sum();
    let stat = n as f64 * explained / uu;
    Ok(TestResult {
        test_name: TestName::WhiteNn,
        statistic: stat,
        p_value: chi2_sf(stat, kept),
        lags_or_df: kept,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt step; columns that are numerically in the span of
/// the basis are dropped.
fn push_orthogonal(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>) {
    let norm0 = dot(&v, &v);
    for _ in 0..2 {
        for b in basis.iter() {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, w)| *x -= c * w);
        }
    }
    let norm = dot(&v, &v);
    if norm > 1e-8 * norm0 && norm > 0.0 {
        let s = norm.sqrt();
        v.iter_mut().for_each(|x| *x /= s);
        basis.push(v);
    }
}
