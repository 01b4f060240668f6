//! Acceptance suite: one pass/fail line per criterion.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use horserace::arima::{fit_arima, ArimaOrder};
use horserace::diagnostics::{adf, bonferroni_adjust, breusch_pagan, kpss, ljung_box, white_nn_test, AdfLag};
use horserace::evaluation::{
    delta_scale, mae, mode_vote, msfe, rank_difference, rolling_cv, run_horse_race, HorseRaceReport, RaceConfig,
    VoteCell, RAND_NAME,
};
use horserace::sim::{simulate_panel, SimSpec};
use horserace::stats::acf;
use horserace::TimeSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{Binomial, DiscreteCDF};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let d = Normal::new(0.0, 1.0).unwrap();
    (0..n).map(|_| d.sample(rng)).collect()
}

fn ar1(rng: &mut ChaCha8Rng, n: usize, phi: f64) -> Vec<f64> {
    let e = normals(rng, n + 200);
    let mut x = vec![0.0; n + 200];
    for t in 1..x.len() {
        x[t] = phi * x[t - 1] + e[t];
    }
    x.split_off(200)
}

fn cumsum(e: &[f64]) -> Vec<f64> {
    e.iter()
        .scan(0.0, |s, v| {
            *s += v;
            Some(*s)
        })
        .collect()
}

fn series(values: Vec<f64>) -> TimeSeries {
    TimeSeries::from_start("s", chrono::NaiveDate::from_ymd_opt(2000, 1, 1).unwrap(), values).unwrap()
}

fn rw_baseline() -> Outcome {
    let config = RaceConfig::default();
    let mut grand = 0.0;
    let mut within = 0;
    for seed in 0..100 {
        let panel = simulate_panel(&SimSpec { beta: 0.0, seed: 10_000 + seed, ..Default::default() }).unwrap();
        let mut per_split = Vec::new();
        for &r in &config.window_grid {
            let w = rolling_cv(&panel, None, r, &config).unwrap();
            let f: Vec<f64> = w.iter().map(|x| x.forecast.unwrap()).collect();
            let a: Vec<f64> = w.iter().map(|x| x.actual).collect();
            per_split.push(msfe(&f, &a).unwrap());
        }
        let avg = per_split.iter().sum::<f64>() / per_split.len() as f64;
        within += usize::from((avg / 2.5e-5 - 1.0).abs() <= 0.15);
        grand += avg / 100.0;
    }
    let rel = grand / 2.5e-5 - 1.0;
    outcome(
        rel.abs() <= 0.15,
        format!("mean split-averaged RW MSFE {grand:.4e} ({:+.1}% vs 2.5e-5); {within}/100 panels individually within 15%", 100.0 * rel),
    )
}

fn estimator_recovery() -> Outcome {
    let mut ar_hits = 0;
    let mut ma_hits = 0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(20_000 + seed);
        let x = ar1(&mut rng, 1000, 0.8);
        let m = fit_arima(&series(x), &ArimaOrder::new(1, 0, 0)).unwrap();
        ar_hits += usize::from((m.ar[0] - 0.8).abs() <= 0.05);
        let e = normals(&mut rng, 2001);
        let y: Vec<f64> = (1..e.len()).map(|t| e[t] + 0.5 * e[t - 1]).collect();
        let m = fit_arima(&series(y), &ArimaOrder::new(0, 0, 1)).unwrap();
        ma_hits += usize::from((m.ma[0] - 0.5).abs() <= 0.05);
    }
    outcome(
        ar_hits >= 48 && ma_hits >= 48,
        format!("AR(1) phi=0.8 n=1000: {ar_hits}/50 within 0.05; MA(1) theta=0.5 n=2000: {ma_hits}/50 within 0.05"),
    )
}

fn power_reports() -> Vec<HorseRaceReport> {
    (1..=5)
        .map(|seed| {
            let panel = simulate_panel(&SimSpec { seed, ..Default::default() }).unwrap();
            run_horse_race(&panel, &RaceConfig { seed, ..Default::default() }).unwrap()
        })
        .collect()
}

fn horse_race_power(reports: &[HorseRaceReport]) -> Outcome {
    let wins: Vec<usize> = reports.iter().map(|r| r.votes("x").unwrap()).collect();
    let share = wins.iter().sum::<usize>() as f64 / (32 * wins.len()) as f64;
    outcome(
        share >= 0.70,
        format!("true covariate beats RW and Rand in {:.1}% of splits (per panel of 32: {wins:?})", 100.0 * share),
    )
}

/// Splits in which `a` has lower MSFE than both the random walk and `b`.
fn best_of_three(report: &HorseRaceReport, a: &str, b: &str) -> usize {
    report
        .windows
        .iter()
        .filter(|&&r| {
            let (sa, sb) = (report.split(a, r).unwrap().metrics, report.split(b, r).unwrap().metrics);
            matches!((sa, sb), (Some(x), Some(y)) if x.msfe < x.rw_msfe && x.msfe < y.msfe)
        })
        .count()
}

fn null_calibration() -> Outcome {
    let config = RaceConfig { window_grid: (310..=372).step_by(2).collect(), ..Default::default() };
    let (mut x_ahead, mut rand_ahead, mut ties) = (0, 0, 0);
    let mut pairs = Vec::new();
    for seed in 0..20 {
        let panel = simulate_panel(&SimSpec { beta: 0.0, t: 400, seed: 30_000 + seed, ..Default::default() }).unwrap();
        let report = run_horse_race(&panel, &RaceConfig { seed: 30_000 + seed, ..config.clone() }).unwrap();
        let nx = report.votes("x").unwrap();
        let nr = best_of_three(&report, RAND_NAME, "x");
        pairs.push((nx, nr));
        match nx.cmp(&nr) {
            std::cmp::Ordering::Greater => x_ahead += 1,
            std::cmp::Ordering::Less => rand_ahead += 1,
            std::cmp::Ordering::Equal => ties += 1,
        }
    }
    let n = x_ahead + rand_ahead;
    let (lo, hi) = binomial_band(n as u64);
    outcome(
        (lo..=hi).contains(&x_ahead),
        format!(
            "panels where x out-votes Rand: {x_ahead}, Rand out-votes x: {rand_ahead}, ties {ties}; 95% band for {n} untied panels [{lo}, {hi}]; (x, Rand) counts {pairs:?}"
        ),
    )
}

/// Central 95% interval of Binomial(n, 1/2).
fn binomial_band(n: u64) -> (usize, usize) {
    if n == 0 {
        return (0, 0);
    }
    let b = Binomial::new(0.5, n).unwrap();
    let lo = (0..=n).find(|&k| b.cdf(k) > 0.025).unwrap();
    let hi = (0..=n).find(|&k| b.cdf(k) >= 0.975).unwrap();
    (lo as usize, hi as usize)
}

fn rejection_rate(seeds: u64, base: u64, test: impl Fn(&mut ChaCha8Rng, u64) -> bool) -> f64 {
    let hits = (0..seeds)
        .filter(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(base + s);
            test(&mut rng, s)
        })
        .count();
    hits as f64 / seeds as f64
}

fn test_sizes() -> Outcome {
    let lb = rejection_rate(1000, 40_000, |rng, _| ljung_box(&normals(rng, 500), 10, 0).unwrap().rejects(0.05));
    let wh = rejection_rate(1000, 41_000, |rng, s| white_nn_test(&ar1(rng, 500, 0.5), 2, s).unwrap().rejects(0.05));
    let bp = rejection_rate(1000, 42_000, |rng, _| breusch_pagan(&normals(rng, 500)).unwrap().rejects(0.05));
    let kpss_rw = rejection_rate(200, 43_000, |rng, _| kpss(&cumsum(&normals(rng, 500))).unwrap().rejects(0.05));
    let kpss_ar = 1.0 - rejection_rate(200, 44_000, |rng, _| kpss(&ar1(rng, 500, 0.5)).unwrap().rejects(0.05));
    let adf_rw = 1.0 - rejection_rate(200, 45_000, |rng, _| adf(&cumsum(&normals(rng, 500)), AdfLag::Fixed).unwrap().rejects(0.05));
    let adf_ar = rejection_rate(200, 46_000, |rng, _| adf(&ar1(rng, 500, 0.5), AdfLag::Fixed).unwrap().rejects(0.05));
    let size_ok = |r: f64| (0.03..=0.07).contains(&r);
    let pass = size_ok(lb) && size_ok(wh) && size_ok(bp) && [kpss_rw, kpss_ar, adf_rw, adf_ar].iter().all(|c| *c >= 0.90);
    outcome(
        pass,
        format!(
            "sizes at 0.05: Ljung-Box {lb:.3}, White {wh:.3}, Breusch-Pagan {bp:.3}; correct classification: KPSS RW {kpss_rw:.3} AR {kpss_ar:.3}, ADF RW {adf_rw:.3} AR {adf_ar:.3}"
        ),
    )
}

fn arithmetic() -> Outcome {
    // (predictor, delta AIC, delta BIC) of the covariate models; the random walk
    // sits at 352.13 / 360.83 above the minimum
    let rows = [
        ("bank", 4.55, 4.98),
        ("banking", 5.25, 5.54),
        ("banks", 4.14, 4.42),
        ("debt", 0.00, 0.00),
        ("ECB", 2.18, 2.66),
        ("economy", 4.60, 4.89),
        ("Euro", 2.82, 3.27),
        ("Germany", 4.26, 4.56),
        ("Greece", 5.22, 5.51),
        ("Greek", 5.32, 5.61),
        ("Hollande", 5.16, 5.45),
        ("Italian", 3.99, 4.19),
        ("Italy", 4.28, 4.58),
        ("Moodys", 1.61, 1.86),
        ("rand", 1.23, 1.52),
        ("risk", 3.83, 5.84),
        ("SP", 3.09, 3.40),
        ("Spain", 4.50, 4.79),
    ];
    let (aic_min, bic_min) = (-4187.36, -4171.92);
    let raw_aic: Vec<Vec<f64>> = rows.iter().map(|r| vec![aic_min + 352.13, aic_min + r.1]).collect();
    let raw_bic: Vec<Vec<f64>> = rows.iter().map(|r| vec![bic_min + 360.83, bic_min + r.2]).collect();
    let (da, db) = (delta_scale(&raw_aic).unwrap(), delta_scale(&raw_bic).unwrap());
    let shown = |v: f64| format!("{v:.2}");
    let table_ok = rows.iter().enumerate().all(|(i, r)| {
        shown(da[i][0]) == "352.13" && shown(db[i][0]) == "360.83" && shown(da[i][1]) == shown(r.1) && shown(db[i][1]) == shown(r.2)
    });
    let debt = rows.iter().position(|r| r.0 == "debt").unwrap();
    let min_ok = da[debt][1] == 0.0 && db[debt][1] == 0.0;

    // (raw, adjusted) Ljung-Box p-values as displayed, 32 splits
    let lb = [
        (0.004, 0.122),
        (0.004, 0.139),
        (0.004, 0.123),
        (0.004, 0.122),
        (0.001, 0.047),
        (0.003, 0.112),
        (0.019, 0.609),
        (0.000, 0.011),
        (0.002, 0.055),
        (0.006, 0.187),
        (0.008, 0.266),
        (0.020, 0.648),
        (0.018, 0.585),
        (0.027, 0.876),
        (0.015, 0.494),
        (0.037, 1.000),
        (0.554, 1.000),
    ];
    let adj = bonferroni_adjust(&[0.554, 0.004, 0.0, 1.0], 32).unwrap();
    let bonf_ok = shown3(adj[0]) == "1.000"
        && shown3(adj[1]) == "0.128"
        && adj[2] == 0.0
        && adj[3] == 1.0
        && lb.iter().all(|&(raw, published)| {
            // any raw value that rounds to the displayed one may underlie the published adjustment
            let lo = bonferroni_adjust(&[(raw - 0.0005f64).max(0.0)], 32).unwrap()[0];
            let hi = bonferroni_adjust(&[raw + 0.0005], 32).unwrap()[0];
            published >= lo - 0.0005 && published <= hi + 0.0005
        });

    let freq = vec![("risk".to_string(), 16), ("Euro".to_string(), 1)];
    let pred = vec![("risk".to_string(), 1), ("Euro".to_string(), 17)];
    let diff = rank_difference(&freq, &pred).unwrap();
    let rank_ok = diff == vec![("risk".to_string(), -15), ("Euro".to_string(), 16)];
    outcome(
        table_ok && min_ok && bonf_ok && rank_ok,
        format!("delta table rows {table_ok}, debt minimum {min_ok}, Bonferroni {bonf_ok}, rank difference {diff:?}"),
    )
}

fn shown3(v: f64) -> String {
    format!("{v:.3}")
}

fn accounting(reports: &[HorseRaceReport]) -> Outcome {
    let panel = simulate_panel(&SimSpec { seed: 1, ..Default::default() }).unwrap();
    let w530 = rolling_cv(&panel, None, 530, &RaceConfig::default()).unwrap().len();
    let p_ok = reports
        .iter()
        .all(|rep| rep.splits.iter().flatten().all(|s| s.p_attempted == rep.t - s.r));
    let split_530 = reports[0].split("x", 530).unwrap().p_attempted;
    let rates: Vec<f64> = reports.iter().map(HorseRaceReport::skip_rate).collect();
    let worst = rates.iter().cloned().fold(0.0, f64::max);
    outcome(
        p_ok && w530 == 106 && split_530 == 106 && worst < 0.02,
        format!(
            "P = T - R in every split: {p_ok}; R=530, T=636 gives {w530} windows (P/R = {:.3}); skip rates {:?}",
            w530 as f64 / 530.0,
            rates.iter().map(|r| format!("{:.2}%", 100.0 * r)).collect::<Vec<_>>()
        ),
    )
}

fn oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(50_000);
    let mut worst: f64 = 0.0;
    let mut votes_ok = true;
    for _ in 0..200 {
        let n = rng.gen_range(1..200);
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let (mut sq, mut ab) = (0.0, 0.0);
        for i in 0..n {
            sq += (a[i] - f[i]) * (a[i] - f[i]);
            ab += (a[i] - f[i]).abs();
        }
        worst = worst.max((msfe(&f, &a).unwrap() - sq / n as f64).abs());
        worst = worst.max((mae(&f, &a).unwrap() - ab / n as f64).abs());

        let m = rng.gen_range(30..300);
        let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lags = 20.min(m - 1);
        let r = acf(&x, lags).unwrap();
        let mean = x.iter().sum::<f64>() / m as f64;
        let mut c0 = 0.0;
        for v in &x {
            c0 += (v - mean) * (v - mean);
        }
        for l in 1..=lags {
            let mut c = 0.0;
            for t in l..m {
                c += (x[t] - mean) * (x[t - l] - mean);
            }
            worst = worst.max((r.values[l - 1] - c / c0).abs());
        }

        let (k, s) = (5, 8);
        let grid: Vec<Vec<VoteCell>> = (0..k)
            .map(|_| {
                (0..s)
                    .map(|_| VoteCell {
                        metric: (rng.gen::<f64>() > 0.1).then(|| rng.gen_range(0..4) as f64),
                        rw_metric: Some(rng.gen_range(0..4) as f64),
                    })
                    .collect()
            })
            .collect();
        let rand_row = k - 1;
        let (by_cov, by_split) = mode_vote(&grid, rand_row).unwrap();
        let mut exp_cov = vec![0; k];
        let mut exp_split = vec![0; s];
        for i in 0..k {
            for v in 0..s {
                let (Some(mv), Some(rw)) = (grid[i][v].metric, grid[i][v].rw_metric) else { continue };
                if i == rand_row {
                    if mv < rw {
                        exp_cov[i] += 1;
                    }
                } else if mv < rw && grid[rand_row][v].metric.is_some_and(|rm| mv < rm) {
                    exp_cov[i] += 1;
                    exp_split[v] += 1;
                }
            }
        }
        votes_ok &= by_cov == exp_cov && by_split == exp_split;
    }
    outcome(
        worst <= 1e-12 && votes_ok,
        format!("max |engine - loop oracle| for msfe/mae/acf {worst:.2e}; mode votes exact: {votes_ok}"),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_horserace");
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let call = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    call(&["simulate", "--out", data.to_str().unwrap(), "--t", "400", "--noise", "1", "--seed", "7"]);
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "target_path = \"data/target.csv\"\ncovariates_path = \"data/covariates.csv\"\nseed = 11\nwindow_grid = [310, 330, 350, 370]\n").unwrap();
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        call(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", jobs]);
        out
    };
    let (a, b, c) = (run("a", "1"), run("b", "1"), run("c", "4"));
    let (same_ab, files) = same_tree(&a, &b);
    let (same_ac, _) = same_tree(&a, &c);
    outcome(
        same_ab && same_ac && files > 0,
        format!("{files} report files; identical across repeat runs: {same_ab}; identical with --jobs 1 vs 4: {same_ac}"),
    )
}

fn same_tree(a: &Path, b: &Path) -> (bool, usize) {
    let mut names: Vec<_> = std::fs::read_dir(a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let count_b = std::fs::read_dir(b).unwrap().count();
    let same = names.len() == count_b
        && names.iter().all(|n| std::fs::read(a.join(n)).ok() == std::fs::read(b.join(n)).ok());
    (same, names.len())
}

fn main() {
    let started = Instant::now();
    let mut results: Vec<(usize, &str, Outcome, Duration)> = Vec::new();
    let mut record = |id: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t0 = Instant::now();
        let o = f();
        let el = t0.elapsed();
        println!("[{}] {id}. {name} ({:.1}s): {}", if o.pass { "PASS" } else { "FAIL" }, el.as_secs_f64(), o.detail);
        results.push((id, name, o, el));
    };
    record(1, "random walk baseline calibration", &mut rw_baseline);
    record(2, "estimator recovery", &mut estimator_recovery);
    let t0 = Instant::now();
    let reports = power_reports();
    let race_time = t0.elapsed();
    record(3, "horse-race power", &mut || {
        let mut o = horse_race_power(&reports);
        o.detail.push_str(&format!("; 5 panels raced in {:.1}s", race_time.as_secs_f64()));
        o
    });
    record(4, "null calibration", &mut null_calibration);
    record(5, "test size and classification", &mut test_sizes);
    record(6, "arithmetic reproduction", &mut arithmetic);
    record(7, "accounting", &mut || accounting(&reports));
    record(8, "oracle equivalence", &mut oracles);
    record(9, "determinism", &mut determinism);
    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        results.len() - failed.len(),
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
