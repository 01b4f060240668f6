//! Descriptive statistics: central moments, correlograms and ranking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First four standardized central moments.
///
/// `skewness` and `kurtosis` are `None` when the variance is zero.
/// Kurtosis is raw (3 for a normal distribution), not excess.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Central moments with divisor `n`.
pub fn moments(values: &[f64]) -> Result<MomentSummary> {
    if values.len() < 4 {
        return Err(Error::Length {
            needed: 4,
            got: values.len(),
        });
    }
    let n = values.len() as f64;
    let m1 = mean(values);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let c = v - m1;
        let c2 = c * c;
        m2 += c2;
        m3 += c2 * c;
        m4 += c2 * c2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skewness, kurtosis) = if m2 > 0.0 {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2)))
    } else {
        (None, None)
    };
    Ok(MomentSummary {
        mean: m1,
        variance: m2,
        skewness,
        kurtosis,
    })
}

/// Autocorrelations (or partial autocorrelations) at lags `1..=max_lag`,
/// with the approximate 95% white-noise band `1.96 / sqrt(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlogram {
    pub values: Vec<f64>,
    pub band: f64,
}

fn check_correlogram_input(values: &[f64], max_lag: usize) -> Result<()> {
    if max_lag == 0 {
        return Err(Error::Input("max_lag must be at least 1".into()));
    }
    if values.len() <= max_lag {
        return Err(Error::Length {
            needed: max_lag + 1,
            got: values.len(),
        });
    }
    Ok(())
}

/// Sample autocovariances at lags `0..=max_lag` (divisor `n`).
pub(crate) fn autocovariances(values: &[f64], max_lag: usize) -> Vec<f64> {
    let n = values.len();
    let m = mean(values);
    let centered: Vec<f64> = values.iter().map(|v| v - m).collect();
    (0..=max_lag.min(n - 1))
        .map(|lag| {
            centered[..n - lag]
                .iter()
                .zip(&centered[lag..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// Sample autocorrelation function without the lag-0 spike.
pub fn acf(values: &[f64], max_lag: usize) -> Result<Correlogram> {
    check_correlogram_input(values, max_lag)?;
    let gamma = autocovariances(values, max_lag);
    if gamma[0] <= 0.0 {
        return Err(Error::ZeroVariance("autocorrelation of a constant series".into()));
    }
    Ok(Correlogram {
        values: gamma[1..].iter().map(|g| g / gamma[0]).collect(),
        band: 1.96 / (values.len() as f64).sqrt(),
    })
}

/// Partial autocorrelations from the sample ACF by the Durbin-Levinson recursion.
pub fn pacf(values: &[f64], max_lag: usize) -> Result<Correlogram> {
    let rho = acf(values, max_lag)?;
    Ok(Correlogram {
        values: durbin_levinson(&rho.values),
        band: rho.band,
    })
}

/// Partial autocorrelations from autocorrelations `rho[0] = r_1, ...`.
pub(crate) fn durbin_levinson(rho: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rho.len());
    let mut phi: Vec<f64> = Vec::with_capacity(rho.len());
    for k in 0..rho.len() {
        let num = rho[k] - (0..k).map(|j| phi[j] * rho[k - 1 - j]).sum::<f64>();
        let den = 1.0 - (0..k).map(|j| phi[j] * rho[j]).sum::<f64>();
        let pkk = if den.abs() > f64::EPSILON { num / den } else { 0.0 };
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - pkk * prev[k - 1 - j];
        }
        phi.push(pkk);
        out.push(pkk.clamp(-1.0, 1.0));
    }
    out
}

/// Which end of the score scale is "best".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Smallest score gets rank 1.
    Ascending,
    /// Largest score gets rank 1.
    Descending,
}

/// Competition ranking: rank 1 is best, ties share the minimum rank.
pub fn rank(scores: &[f64], direction: Direction) -> Result<Vec<usize>> {
    if scores.is_empty() {
        return Err(Error::Input("cannot rank an empty score list".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Input("NaN score".into()));
    }
    Ok(scores
        .iter()
        .map(|&s| {
            1 + scores
                .iter()
                .filter(|&&o| match direction {
                    Direction::Ascending => o < s,
                    Direction::Descending => o > s,
                })
                .count()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn degenerate_moments() {
        let m = moments(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(m.mean, 1.0);
        assert_eq!(m.variance, 0.0);
        assert!(m.skewness.is_none() && m.kurtosis.is_none());
        assert!(moments(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn alternating_moments() {
        let m = moments(&[-1.0, 1.0, -1.0, 1.0]).unwrap();
        assert_eq!((m.mean, m.variance), (0.0, 1.0));
        assert_eq!(m.skewness, Some(0.0));
        assert_eq!(m.kurtosis, Some(1.0));
    }

    #[test]
    fn normal_sample_moments() {
        let m = moments(&normals(100_000, 7)).unwrap();
        assert!(m.skewness.unwrap().abs() < 0.05);
        assert!((m.kurtosis.unwrap() - 3.0).abs() < 0.1);
    }

    #[test]
    fn acf_of_alternating_series() {
        let x: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        // direct formula: mean 0, 99 products of -1 over a sum of squares of 100
        let oracle = -99.0 / 100.0;
        let r = acf(&x, 1).unwrap();
        assert!((r.values[0] - oracle).abs() < 1e-15);
        assert!((r.band - 0.196).abs() < 1e-15);
    }

    #[test]
    fn acf_of_noise_within_band() {
        let x = normals(1000, 11);
        let r = acf(&x, 20).unwrap();
        let inside = r.values.iter().filter(|v| v.abs() < r.band).count();
        assert!(inside as f64 >= 0.93 * 20.0, "{inside}/20 inside");
    }

    #[test]
    fn acf_of_ar1() {
        let e = normals(2000, 3);
        let mut x = vec![0.0; 2000];
        for t in 1..2000 {
            x[t] = 0.8 * x[t - 1] + e[t];
        }
        let r = acf(&x, 5).unwrap();
        assert!((r.values[0] - 0.8).abs() < 0.05, "{}", r.values[0]);
        let p = pacf(&x, 5).unwrap();
        assert!((p.values[0] - 0.8).abs() < 0.05);
        assert!(p.values[1..].iter().all(|v| v.abs() < 0.1));
    }

    #[test]
    fn correlogram_errors() {
        assert!(matches!(acf(&[1.0; 10], 2), Err(Error::ZeroVariance(_))));
        assert!(matches!(acf(&[1.0, 2.0], 2), Err(Error::Length { .. })));
        assert!(acf(&[1.0, 2.0, 3.0], 0).is_err());
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(rank(&[3.0, 1.0, 2.0], Direction::Ascending).unwrap(), vec![3, 1, 2]);
        assert_eq!(rank(&[5.0, 5.0, 1.0], Direction::Ascending).unwrap(), vec![2, 2, 1]);
        assert_eq!(rank(&[5.0, 5.0, 1.0], Direction::Descending).unwrap(), vec![1, 1, 3]);
        assert!(rank(&[1.0, f64::NAN], Direction::Ascending).is_err());
        assert!(rank(&[], Direction::Ascending).is_err());
    }

    proptest! {
        #[test]
        fn acf_bounded_and_pacf_matches_at_lag_one(x in prop::collection::vec(-100.0f64..100.0, 12..60)) {
            prop_assume!(x.iter().any(|v| (v - x[0]).abs() > 1e-6));
            let a = acf(&x, 8).unwrap();
            let p = pacf(&x, 8).unwrap();
            prop_assert!(a.values.iter().all(|v| (-1.0..=1.0).contains(v)));
            prop_assert!(p.values.iter().all(|v| (-1.0..=1.0).contains(v)));
            prop_assert_eq!(a.values[0], p.values[0]);
        }

        #[test]
        fn rank_invariant_under_monotone_maps(x in prop::collection::vec(-50.0f64..50.0, 1..30)) {
            let transformed: Vec<f64> = x.iter().map(|v| (v / 10.0).exp() * 3.0 + 1.0).collect();
            prop_assert_eq!(
                rank(&x, Direction::Ascending).unwrap(),
                rank(&transformed, Direction::Ascending).unwrap()
            );
        }

        #[test]
        fn zscored_moments(x in prop::collection::vec(-1e3f64..1e3, 4..80)) {
            let m = moments(&x).unwrap();
            prop_assume!(m.variance > 1e-6);
            let sd = m.variance.sqrt();
            let z: Vec<f64> = x.iter().map(|v| (v - m.mean) / sd).collect();
            let mz = moments(&z).unwrap();
            prop_assert!(mz.mean.abs() < 1e-10);
            prop_assert!((mz.variance - 1.0).abs() < 1e-10);
        }
    }
}
