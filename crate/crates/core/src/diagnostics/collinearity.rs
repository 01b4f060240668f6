use crate::error::{Error, Result};
use crate::regression::{design, ols};
use crate::series::TimeSeries;

/// Variance inflation factors `1 / (1 - R^2_j)`, each from regressing one
/// covariate on a constant and all the others. Perfect collinearity is
/// reported as `f64::INFINITY`.
pub fn vif(covariates: &[TimeSeries]) -> Result<Vec<f64>> {
    if covariates.len() < 2 {
        return Err(Error::Input("VIF needs at least two covariates".into()));
    }
    let n = covariates[0].len();
    for c in covariates {
        if c.len() != n {
            return Err(Error::Index(format!("covariate '{}' has a different length", c.name())));
        }
        let v = c.values();
        let m = v.iter().sum::<f64>() / n as f64;
        if !(v.iter().any(|x| (x - m).abs() > 0.0)) {
            return Err(Error::ZeroVariance(format!("covariate '{}' is constant", c.name())));
        }
    }
    let ones = vec![1.0; n];
    (0..covariates.len())
        .map(|j| {
            let mut cols: Vec<&[f64]> = vec![&ones];
            cols.extend(
                covariates
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != j)
                    .map(|(_, c)| c.values()),
            );
            match ols(covariates[j].values(), &design(&cols)) {
                Ok(fit) if fit.r_squared < 1.0 - 1e-10 => Ok(1.0 / (1.0 - fit.r_squared)),
                Ok(_) | Err(Error::Collinear(_)) => Ok(f64::INFINITY),
                Err(e) => Err(e),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(name: &str, v: Vec<f64>) -> TimeSeries {
        TimeSeries::from_start(name, "2012-01-01".parse().unwrap(), v).unwrap()
    }

    #[test]
    fn orthogonal_columns_have_unit_vif() {
        // centered, mutually orthogonal contrasts
        let a = vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let b = vec![1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0];
        let c = vec![1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0];
        let v = vif(&[ts("a", a), ts("b", b), ts("c", c)]).unwrap();
        for x in v {
            assert!((x - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn exact_multiple_is_infinite() {
        let a: Vec<f64> = (0..50).map(|i| ((i * 7) % 13) as f64).collect();
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        let v = vif(&[ts("a", a), ts("b", b)]).unwrap();
        assert!(v.iter().all(|x| x.is_infinite()));
    }
}
