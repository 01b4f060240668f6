use chrono::NaiveDate;
use horserace::series::{difference, difference_values, log_transform};
use horserace::stats::{acf, moments, pacf, rank, Direction};
use horserace::TimeSeries;
use proptest::prelude::*;

fn ts(values: Vec<f64>) -> TimeSeries {
    TimeSeries::from_start("s", NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), values).unwrap()
}

fn values(min_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, min_len..200)
}

proptest! {
    #[test]
    fn differencing_composes(x in values(3)) {
        let once = difference_values(&difference_values(&x, 1), 1);
        let twice = difference_values(&x, 2);
        prop_assert_eq!(once.len(), x.len() - 2);
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn differenced_series_drops_leading_dates(x in values(2)) {
        let s = ts(x.clone());
        let d = difference(&s, 1).unwrap();
        prop_assert_eq!(d.len(), x.len() - 1);
        prop_assert_eq!(d.index()[0], s.index()[1]);
    }

    #[test]
    fn log_round_trip(x in prop::collection::vec(1e-6f64..1e6, 1..100)) {
        let l = log_transform(&ts(x.clone())).unwrap();
        for (a, b) in l.values().iter().zip(&x) {
            prop_assert!((a.exp() - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn correlations_are_bounded(x in values(10)) {
        prop_assume!(x.iter().any(|v| (v - x[0]).abs() > 1e-6));
        let lags = 10.min(x.len() - 1);
        for r in acf(&x, lags).unwrap().values.into_iter().chain(pacf(&x, lags).unwrap().values) {
            prop_assert!(r.abs() <= 1.0 + 1e-9, "{}", r);
        }
    }

    #[test]
    fn ranks_are_invariant_to_monotone_maps(x in prop::collection::vec(-50.0f64..50.0, 1..60)) {
        let r = rank(&x, Direction::Ascending).unwrap();
        let mapped: Vec<f64> = x.iter().map(|v| 3.0 * v + 7.0).collect();
        prop_assert_eq!(&r, &rank(&mapped, Direction::Ascending).unwrap());
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert_eq!(&r, &rank(&neg, Direction::Descending).unwrap());
        prop_assert!(r.iter().all(|&k| k >= 1 && k <= x.len()));
    }

    #[test]
    fn standardized_series_has_unit_moments(x in values(4)) {
        let m = moments(&x).unwrap();
        prop_assume!(m.variance > 1e-6);
        let z: Vec<f64> = x.iter().map(|v| (v - m.mean) / m.variance.sqrt()).collect();
        let mz = moments(&z).unwrap();
        prop_assert!(mz.mean.abs() < 1e-9);
        prop_assert!((mz.variance - 1.0).abs() < 1e-9);
        prop_assert!((mz.skewness.unwrap() - m.skewness.unwrap()).abs() < 1e-6);
        prop_assert!(mz.kurtosis.unwrap() >= 1.0 - 1e-9);
    }
}

#[test]
fn constant_series_has_no_shape_moments() {
    let m = moments(&[2.0; 10]).unwrap();
    assert_eq!(m.variance, 0.0);
    assert!(m.skewness.is_none() && m.kurtosis.is_none());
    assert!(moments(&[1.0, 2.0, 3.0]).is_err());
}

#[test]
fn log_rejects_non_positive_values() {
    assert!(log_transform(&ts(vec![1.0, 0.0, 2.0])).is_err());
}
