use chrono::NaiveDate;
use horserace::arima::{auto_fit, fit_arima, fit_regarima, forecast_one_step, root_moduli, ArimaOrder, SelectionConfig};
use horserace::TimeSeries;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2010, 1, 1).unwrap()
}

fn noise(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Normal::new(0.0, 1.0).unwrap();
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

fn arma(seed: u64, n: usize, ar: &[f64], ma: &[f64]) -> Vec<f64> {
    let burn = 300;
    let e = noise(seed, n + burn);
    let mut x = vec![0.0; n + burn];
    for t in 0..x.len() {
        let mut v = e[t];
        for (i, a) in ar.iter().enumerate() {
            if t > i {
                v += a * x[t - 1 - i];
            }
        }
        for (j, m) in ma.iter().enumerate() {
            if t > j {
                v += m * e[t - 1 - j];
            }
        }
        x[t] = v;
    }
    x.split_off(burn)
}

fn ts(values: Vec<f64>) -> TimeSeries {
    TimeSeries::from_start("y", start(), values).unwrap()
}

/// Exact Gaussian AR(1) log-likelihood with the innovation variance profiled out.
fn ar1_profile_loglik(x: &[f64], phi: f64) -> f64 {
    let n = x.len() as f64;
    let mut ss = (1.0 - phi * phi) * x[0] * x[0];
    for t in 1..x.len() {
        ss += (x[t] - phi * x[t - 1]).powi(2);
    }
    let s2 = ss / n;
    -0.5 * n * ((2.0 * std::f64::consts::PI * s2).ln() + 1.0) + 0.5 * (1.0 - phi * phi).ln()
}

#[test]
fn ar2_coefficients_recovered() {
    let x = arma(1, 3000, &[0.5, -0.3], &[]);
    let m = fit_arima(&ts(x), &ArimaOrder::new(2, 0, 0)).unwrap();
    assert!((m.ar[0] - 0.5).abs() < 0.05, "{:?}", m.ar);
    assert!((m.ar[1] + 0.3).abs() < 0.05, "{:?}", m.ar);
    assert!((m.sigma2 - 1.0).abs() < 0.08);
}

#[test]
fn ar1_likelihood_matches_closed_form() {
    let x = arma(2, 400, &[0.6], &[]);
    let m = fit_arima(&ts(x.clone()), &ArimaOrder::new(1, 0, 0)).unwrap();
    let oracle = ar1_profile_loglik(&x, m.ar[0]);
    assert!((m.loglik - oracle).abs() < 1e-6, "{} vs {oracle}", m.loglik);
    for step in [-0.02, 0.02] {
        assert!(ar1_profile_loglik(&x, m.ar[0] + step) < m.loglik);
    }
    assert_eq!(m.n_params, 2);
    assert!((m.aic - (-2.0 * m.loglik + 4.0)).abs() < 1e-9);
    assert!((m.bic - (-2.0 * m.loglik + 2.0 * (m.n_eff as f64).ln())).abs() < 1e-9);
}

#[test]
fn nested_models_never_lose_likelihood() {
    let x = ts(arma(3, 500, &[0.4], &[0.3]));
    let small = fit_arima(&x, &ArimaOrder::new(1, 0, 0)).unwrap();
    let big = fit_arima(&x, &ArimaOrder::new(1, 0, 1)).unwrap();
    assert!(big.loglik >= small.loglik - 1e-6);
    let bigger = fit_arima(&x, &ArimaOrder::new(2, 0, 1)).unwrap();
    assert!(bigger.loglik >= big.loglik - 1e-6);
}

#[test]
fn regression_coefficient_recovered() {
    let n = 800;
    let xr = arma(4, n, &[0.5], &[]);
    let u = arma(5, n, &[0.4], &[]);
    let y: Vec<f64> = (0..n).map(|t| 1.0 + 2.0 * xr[t] + 0.5 * u[t]).collect();
    let cov = TimeSeries::from_start("x", start(), xr).unwrap();
    let m = fit_regarima(&ts(y), &[cov], &ArimaOrder::new(1, 0, 0).with_constant(true)).unwrap();
    assert!((m.reg_coeffs[0] - 2.0).abs() < 0.03, "{:?}", m.reg_coeffs);
    assert!((m.ar[0] - 0.4).abs() < 0.08, "{:?}", m.ar);
    assert!((m.intercept.unwrap() - 1.0).abs() < 0.1);
}

#[test]
fn auto_selection_finds_differencing_and_ar_structure() {
    let rw: Vec<f64> = noise(6, 400).iter().scan(0.0, |s, e| {
        *s += e;
        Some(*s)
    }).collect();
    let m = auto_fit(&ts(rw), &[], &SelectionConfig::default()).unwrap();
    assert_eq!(m.order.d, 1);

    let x = ts(arma(7, 600, &[0.5], &[]));
    let m = auto_fit(&x, &[], &SelectionConfig::default()).unwrap();
    assert_eq!(m.order.d, 0);
    assert!(m.order.p >= 1);
    let ar1 = fit_arima(&x, &ArimaOrder::new(1, 0, 0).with_constant(true)).unwrap();
    assert!(m.aicc <= ar1.aicc + 1e-6, "selected {} aicc {} vs AR(1) {}", m.order, m.aicc, ar1.aicc);
}

#[test]
fn ar1_one_step_forecast() {
    let x = arma(8, 500, &[0.7], &[]);
    let history = ts(x.clone());
    let m = fit_arima(&history, &ArimaOrder::new(1, 0, 0)).unwrap();
    let f = forecast_one_step(&m, &history, &[]).unwrap();
    assert!((f.point - m.ar[0] * x[x.len() - 1]).abs() < 1e-9);
    assert_eq!(f.horizon, 1);
    assert_eq!(f.origin_date, history.last_date().unwrap());
}

proptest! {
    #[test]
    fn root_moduli_invert_known_roots(r1 in 1.05f64..5.0, r2 in 1.05f64..5.0, s1 in prop::bool::ANY, s2 in prop::bool::ANY) {
        let a = if s1 { r1 } else { -r1 };
        let b = if s2 { r2 } else { -r2 };
        // (1 - z/a)(1 - z/b)
        let coeffs = [-(1.0 / a + 1.0 / b), 1.0 / (a * b)];
        let mut m = root_moduli(&coeffs);
        m.sort_by(f64::total_cmp);
        let mut want = [r1, r2];
        want.sort_by(f64::total_cmp);
        prop_assert!((m[0] - want[0]).abs() < 1e-8 * want[0]);
        prop_assert!((m[1] - want[1]).abs() < 1e-8 * want[1]);
    }
}
