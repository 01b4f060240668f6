use horserace::evaluation::{
    avg_predictability, delta_scale, mae, make_noise_covariate, mode_vote, msfe, rolling_cv, RaceConfig, VoteCell,
};
use horserace::sim::{simulate_panel, SimSpec};
use proptest::prelude::*;

fn small_panel(seed: u64) -> horserace::Panel {
    simulate_panel(&SimSpec { t: 200, n_noise: 1, seed, ..Default::default() }).unwrap()
}

#[test]
fn random_walk_windows_forecast_the_last_observation() {
    let panel = small_panel(1);
    let y = panel.target().values();
    let r = 150;
    let w = rolling_cv(&panel, None, r, &RaceConfig::default()).unwrap();
    assert_eq!(w.len(), panel.len() - r);
    for (k, win) in w.iter().enumerate() {
        let origin = r - 1 + k;
        assert_eq!(win.origin_index, origin);
        assert_eq!(win.forecast, Some(y[origin]));
        assert_eq!(win.actual, y[origin + 1]);
        assert_eq!(win.rw_forecast, y[origin]);
        assert!(!win.skipped);
    }
    let e: Vec<f64> = w.iter().map(|x| x.rw_error()).collect();
    let rw = msfe(&w.iter().map(|x| x.rw_forecast).collect::<Vec<_>>(), &w.iter().map(|x| x.actual).collect::<Vec<_>>()).unwrap();
    assert!((rw - e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64).abs() < 1e-18);
    assert_eq!(avg_predictability(&[rw - rw, 0.0]).unwrap(), 0.0);
}

#[test]
fn covariate_windows_share_the_random_walk_benchmark() {
    let panel = small_panel(2);
    let config = RaceConfig::default();
    let rw = rolling_cv(&panel, None, 160, &config).unwrap();
    let cov = rolling_cv(&panel, Some("x"), 160, &config).unwrap();
    assert_eq!(rw.len(), cov.len());
    for (a, b) in rw.iter().zip(&cov) {
        assert_eq!(a.rw_forecast, b.rw_forecast);
        assert_eq!(b.covariate_name, "x");
        assert_eq!(b.forecast.is_some(), !b.skipped);
    }
    assert!(rolling_cv(&panel, Some("missing"), 160, &config).is_err());
    assert!(rolling_cv(&panel, None, 200, &config).is_err());
}

#[test]
fn rolling_cv_is_deterministic() {
    let panel = small_panel(3);
    let config = RaceConfig::default();
    let a = rolling_cv(&panel, Some("noise1"), 170, &config).unwrap();
    let b = rolling_cv(&panel, Some("noise1"), 170, &config).unwrap();
    let fa: Vec<_> = a.iter().map(|w| (w.forecast, w.skipped)).collect();
    let fb: Vec<_> = b.iter().map(|w| (w.forecast, w.skipped)).collect();
    assert_eq!(fa, fb);
}

#[test]
fn noise_covariate_resamples_pooled_values() {
    let panel = simulate_panel(&SimSpec { t: 5000, n_noise: 2, ..Default::default() }).unwrap();
    let pooled: Vec<f64> = panel.covariates().iter().flat_map(|c| c.values().to_vec()).collect();
    let rand = make_noise_covariate(&panel, 9).unwrap();
    assert_eq!(rand.len(), panel.len());
    assert!(rand.values().iter().all(|v| pooled.contains(v)));
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let sd = (pooled.iter().map(|v| (v - mean(&pooled)).powi(2)).sum::<f64>() / pooled.len() as f64).sqrt();
    // sample mean within 4 standard errors of the pooled mean
    assert!((mean(rand.values()) - mean(&pooled)).abs() < 4.0 * sd / (panel.len() as f64).sqrt());
    assert_eq!(rand, make_noise_covariate(&panel, 9).unwrap());
    assert_ne!(rand, make_noise_covariate(&panel, 10).unwrap());
}

#[test]
fn mode_vote_hand_worked_grid() {
    let c = |m: Option<f64>, rw: f64| VoteCell { metric: m, rw_metric: Some(rw) };
    // five covariates over eight splits, noise covariate last
    let rw = 10.0;
    let rand = [9.0, 11.0, 9.0, 11.0, 9.0, 11.0, 9.0, 11.0];
    let rows = [
        [8.0, 8.0, 8.0, 8.0, 8.0, 8.0, 8.0, 8.0],
        [9.5, 9.5, 9.5, 9.5, 9.5, 9.5, 9.5, 9.5],
        [12.0, 12.0, 12.0, 12.0, 12.0, 12.0, 12.0, 12.0],
        [10.0, 10.0, 8.5, 8.5, 9.0, 9.0, 7.0, 7.0],
    ];
    let mut grid: Vec<Vec<VoteCell>> = rows.iter().map(|r| r.iter().map(|v| c(Some(*v), rw)).collect()).collect();
    grid[0][7].metric = None;
    grid.push(rand.iter().map(|v| c(Some(*v), rw)).collect());
    let (by_cov, by_split) = mode_vote(&grid, 4).unwrap();
    assert_eq!(by_cov, vec![7, 4, 0, 5, 4]);
    assert_eq!(by_split, vec![1, 2, 2, 3, 1, 3, 2, 2]);
}

proptest! {
    #[test]
    fn squared_error_dominates_absolute_error(
        pairs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..100)
    ) {
        let (f, a): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let m = mae(&f, &a).unwrap();
        prop_assert!(msfe(&f, &a).unwrap() >= m * m - 1e-12);
        prop_assert_eq!(msfe(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn delta_scale_is_shift_invariant(
        table in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 2), 1..20),
        shift in -1e4f64..1e4,
    ) {
        let d = delta_scale(&table).unwrap();
        let shifted: Vec<Vec<f64>> = table.iter().map(|r| r.iter().map(|v| v + shift).collect()).collect();
        let ds = delta_scale(&shifted).unwrap();
        let min = d.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(min, 0.0);
        for (x, y) in d.iter().flatten().zip(ds.iter().flatten()) {
            prop_assert!(*x >= 0.0);
            prop_assert!((x - y).abs() < 1e-8);
        }
    }
}
