//! Browser bindings: simulate a panel, race its covariates against the
//! random walk, and run the diagnostic tests on pasted numbers.

use horserace::config::parse_window_grid;
use horserace::diagnostics::{
    adf, breusch_pagan, default_lags, kpss, ljung_box, phillips_perron, white_nn_test, AdfLag,
    TestResult,
};
use horserace::evaluation::{run_horse_race, RaceConfig};
use horserace::ingest::{panel_from_csv, panel_to_csv};
use horserace::sim::{simulate_panel, SimSpec};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct SimRequest {
    pub t: usize,
    pub beta: f64,
    pub noise: usize,
    pub seed: u64,
}

impl Default for SimRequest {
    fn default() -> Self {
        Self {
            t: 400,
            beta: 0.8,
            noise: 1,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimOutput {
    pub target_csv: String,
    pub covariates_csv: String,
    pub target: Vec<f64>,
}

pub fn simulate_inner(req: &SimRequest) -> horserace::Result<SimOutput> {
    let spec = SimSpec {
        t: req.t,
        beta: req.beta,
        n_noise: req.noise,
        seed: req.seed,
        ..Default::default()
    };
    let panel = simulate_panel(&spec)?;
    let (target_csv, covariates_csv) = panel_to_csv(&panel);
    Ok(SimOutput {
        target_csv,
        covariates_csv,
        target: panel.target().values().to_vec(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RaceRow {
    pub covariate: String,
    pub votes_msfe: usize,
    pub votes_mae: usize,
    pub avg_delta_msfe: Option<f64>,
    /// Per split: (R, covariate MSFE, random-walk MSFE).
    pub splits: Vec<(usize, Option<f64>, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RaceOutput {
    pub t: usize,
    pub windows: Vec<usize>,
    pub skip_rate: f64,
    pub rows: Vec<RaceRow>,
}

pub fn race_inner(
    target_csv: &str,
    covariates_csv: &str,
    windows: &str,
    seed: u64,
) -> horserace::Result<RaceOutput> {
    let (panel, _) = panel_from_csv(target_csv, covariates_csv, ("target", "covariates"))?;
    let config = RaceConfig {
        window_grid: parse_window_grid(windows)?,
        seed,
        ..Default::default()
    };
    let report = run_horse_race(&panel, &config)?;
    let rows = report
        .covariates
        .iter()
        .enumerate()
        .map(|(i, name)| RaceRow {
            covariate: name.clone(),
            votes_msfe: report.votes_msfe.by_covariate[i].1,
            votes_mae: report.votes_mae.by_covariate[i].1,
            avg_delta_msfe: report
                .predictability
                .iter()
                .find(|p| &p.name == name)
                .and_then(|p| p.avg_delta_msfe),
            splits: report.splits[i]
                .iter()
                .zip(&report.rw)
                .map(|(s, rw)| (s.r, s.metrics.map(|m| m.msfe), rw.msfe))
                .collect(),
        })
        .collect();
    Ok(RaceOutput {
        t: report.t,
        skip_rate: report.skip_rate(),
        windows: report.windows.clone(),
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TestLine {
    pub test: String,
    pub result: Option<TestResult>,
    pub error: Option<String>,
}

fn parse_numbers(text: &str) -> horserace::Result<Vec<f64>> {
    text.split(|c: char| c.is_whitespace() || c == ',' || c == ';')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| horserace::Error::Input(format!("not a number: '{s}'")))
        })
        .collect()
}

pub fn diagnose_inner(text: &str, seed: u64) -> horserace::Result<Vec<TestLine>> {
    let x = parse_numbers(text)?;
    let line = |test: &str, r: horserace::Result<TestResult>| match r {
        Ok(r) => TestLine {
            test: test.into(),
            result: Some(r),
            error: None,
        },
        Err(e) => TestLine {
            test: test.into(),
            result: None,
            error: Some(e.to_string()),
        },
    };
    Ok(vec![
        line("Ljung-Box", ljung_box(&x, default_lags(x.len()), 0)),
        line("KPSS (level)", kpss(&x)),
        line("ADF", adf(&x, AdfLag::Fixed)),
        line("Phillips-Perron", phillips_perron(&x)),
        line("White neural network", white_nn_test(&x, 2, seed)),
        line("Breusch-Pagan", breusch_pagan(&x)),
    ])
}

fn to_js<T: Serialize>(r: horserace::Result<T>) -> Result<JsValue, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_wasm_bindgen::to_value(&v).map_err(|e| JsError::new(&e.to_string()))
}

/// Simulates a panel from `{t, beta, noise, seed}`.
#[wasm_bindgen]
pub fn simulate(request: JsValue) -> Result<JsValue, JsError> {
    let req: SimRequest =
        serde_wasm_bindgen::from_value(request).map_err(|e| JsError::new(&e.to_string()))?;
    to_js(simulate_inner(&req))
}

/// Runs a horse race over the window grid `start:end:step` or `a,b,c`.
#[wasm_bindgen]
pub fn race(
    target_csv: &str,
    covariates_csv: &str,
    windows: &str,
    seed: u64,
) -> Result<JsValue, JsError> {
    to_js(race_inner(target_csv, covariates_csv, windows, seed))
}

/// Runs each diagnostic test on whitespace- or comma-separated numbers.
#[wasm_bindgen]
pub fn diagnose(values: &str, seed: u64) -> Result<JsValue, JsError> {
    to_js(diagnose_inner(values, seed))
}
