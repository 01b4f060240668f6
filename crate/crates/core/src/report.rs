//! Report files: CSV tables, plot data and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::diagnostics::{qq_data, TestResult};
use crate::error::{Error, Result};
use crate::evaluation::{HorseRaceReport, SkippedWindow};
use crate::ingest::{IngestLog, PreprocessLog};
use crate::stats::{acf, moments, pacf};

pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "run_manifest.json";
const MAX_PLOT_LAG: usize = 20;

/// Provenance of a run: configuration, data handling and skipped windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: RunConfig,
    pub t: usize,
    pub target: String,
    pub covariates: Vec<String>,
    pub ingest: Option<IngestLog>,
    pub preprocess: PreprocessLog,
    pub skip_rate: f64,
    pub skipped_windows: Vec<SkippedWindow>,
}

impl RunManifest {
    pub fn new(
        config: &RunConfig,
        target: &str,
        report: &HorseRaceReport,
        ingest: Option<IngestLog>,
        preprocess: PreprocessLog,
    ) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            config: config.clone(),
            t: report.t,
            target: target.to_string(),
            covariates: report.covariates.clone(),
            ingest,
            preprocess,
            skip_rate: report.skip_rate(),
            skipped_windows: report.skipped.clone(),
        }
    }
}

fn num(v: Option<f64>, decimals: usize) -> String {
    match v {
        Some(v) if v.is_finite() => format!("{v:.decimals$}"),
        _ => "NA".to_string(),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// File-name-safe form of a covariate name.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// The information-criterion table: one row per covariate with the
/// random walk and covariate-model columns.
pub fn delta_ic_csv(report: &HorseRaceReport) -> String {
    let mut s = String::from("predictor,delta_aic_rw,delta_aic_regarima,delta_bic_rw,delta_bic_regarima,bic_rank\n");
    for r in &report.information {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.predictor,
            num(r.delta_aic_rw, 2),
            num(r.delta_aic, 2),
            num(r.delta_bic_rw, 2),
            num(r.delta_bic, 2),
            opt(r.bic_rank)
        );
    }
    s
}

pub fn mode_votes_csv(report: &HorseRaceReport) -> String {
    let mut s = String::from("group,key,msfe_votes,mae_votes\n");
    for ((name, m), (_, a)) in report.votes_msfe.by_covariate.iter().zip(&report.votes_mae.by_covariate) {
        let _ = writeln!(s, "covariate,{name},{m},{a}");
    }
    for ((r, m), (_, a)) in report.votes_msfe.by_window.iter().zip(&report.votes_mae.by_window) {
        let _ = writeln!(s, "window,{r},{m},{a}");
    }
    s
}

pub fn predictability_csv(report: &HorseRaceReport) -> String {
    let mut s = String::from(
        "covariate,avg_delta_msfe,predictive_power,avg_delta_mae,predictability_rank,frequency,frequency_rank,rank_difference\n",
    );
    for r in &report.predictability {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.name,
            num(r.avg_delta_msfe, 12),
            num(r.avg_delta_msfe.map(|v| -v), 12),
            num(r.avg_delta_mae, 12),
            opt(r.predictability_rank),
            num(r.frequency, 4),
            opt(r.frequency_rank),
            opt(r.rank_difference)
        );
    }
    s
}

/// Per-split tests on the forecast errors of one covariate.
pub fn diagnostics_csv(report: &HorseRaceReport, covariate: usize) -> String {
    let p = |t: Option<TestResult>| num(t.map(|t| t.p_value), 3);
    let mut s = String::from("out,R,P,mean_residual,LB_raw,LB_adj,KP_raw,KP_adj,WH_raw,WH_adj\n");
    for d in &report.diagnostics[covariate] {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            if d.outperformed_rw { "+" } else { "-" },
            d.r,
            d.p,
            num(d.mean_error, 8),
            p(d.ljung_box),
            num(d.ljung_box_adj, 3),
            p(d.kpss),
            num(d.kpss_adj, 3),
            p(d.white_nn),
            num(d.white_nn_adj, 3)
        );
    }
    s
}

/// First four moments of the forecast errors per covariate and split.
pub fn moments_csv(report: &HorseRaceReport) -> String {
    let mut s = String::from("covariate,R,mean,variance,skewness,kurtosis\n");
    for row in &report.splits {
        for split in row {
            let m = moments(&split.errors).ok();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                split.covariate_name,
                split.r,
                num(m.map(|m| m.mean), 10),
                num(m.map(|m| m.variance), 12),
                num(m.and_then(|m| m.skewness), 6),
                num(m.and_then(|m| m.kurtosis), 6)
            );
        }
    }
    s
}

pub fn splits_csv(report: &HorseRaceReport) -> String {
    let mut s = String::from(
        "covariate,R,P_attempted,P_effective,skip_rate,msfe,mae,rw_msfe,rw_mae,mean_aic,mean_bic,outperformed_rw,outperformed_rw_and_rand\n",
    );
    for row in &report.splits {
        for x in row {
            let m = x.metrics;
            let _ = writeln!(
                s,
                "{},{},{},{},{:.4},{},{},{},{},{},{},{},{}",
                x.covariate_name,
                x.r,
                x.p_attempted,
                x.p_effective,
                x.skip_rate(),
                num(m.map(|m| m.msfe), 12),
                num(m.map(|m| m.mae), 12),
                num(m.map(|m| m.rw_msfe), 12),
                num(m.map(|m| m.rw_mae), 12),
                num(x.mean_aic, 4),
                num(x.mean_bic, 4),
                x.outperformed_rw,
                x.outperformed_rw_and_rand
            );
        }
    }
    s
}

fn qq_csv(errors: &[f64]) -> Option<String> {
    let qq = qq_data(errors).ok()?;
    let mut s = String::from("theoretical,sample,band_lower,band_upper\n");
    for i in 0..qq.sample_quantiles.len() {
        let _ = writeln!(
            s,
            "{:.6},{:.10},{:.10},{:.10}",
            qq.theoretical_quantiles[i], qq.sample_quantiles[i], qq.band_lower[i], qq.band_upper[i]
        );
    }
    Some(s)
}

fn acf_pacf_csv(errors: &[f64]) -> Option<String> {
    let lags = MAX_PLOT_LAG.min(errors.len().checked_sub(1)?);
    let a = acf(errors, lags).ok()?;
    let p = pacf(errors, lags).ok()?;
    let mut s = String::from("lag,acf,pacf,band\n");
    for (i, (x, y)) in a.values.iter().zip(&p.values).enumerate() {
        let _ = writeln!(s, "{},{x:.8},{y:.8},{:.8}", i + 1, a.band);
    }
    Some(s)
}

/// Writes every report file into `out_dir`, creating it if needed, and
/// returns the paths written in order.
pub fn emit_report(report: &HorseRaceReport, manifest: &RunManifest, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", out_dir.display()))))?;
    let mut written = Vec::new();
    let mut put = |name: String, contents: String| -> Result<()> {
        let path = out_dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        written.push(path);
        Ok(())
    };
    put("delta_ic.csv".into(), delta_ic_csv(report))?;
    put("mode_votes.csv".into(), mode_votes_csv(report))?;
    put("predictability.csv".into(), predictability_csv(report))?;
    put("splits.csv".into(), splits_csv(report))?;
    put("moments.csv".into(), moments_csv(report))?;
    for (i, name) in report.covariates.iter().enumerate() {
        let stem = file_stem(name);
        put(format!("diagnostics_{stem}.csv"), diagnostics_csv(report, i))?;
        for split in &report.splits[i] {
            if let Some(qq) = qq_csv(&split.errors) {
                put(format!("qq_{stem}_{}.csv", split.r), qq)?;
            }
            if let Some(c) = acf_pacf_csv(&split.errors) {
                put(format!("acf_pacf_{stem}_{}.csv", split.r), c)?;
            }
        }
    }
    put(REPORT_FILE.into(), serde_json::to_string_pretty(report)? + "\n")?;
    put(MANIFEST_FILE.into(), serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok(written)
}

/// Reads back a report and manifest written by [`emit_report`].
pub fn load_report(dir: &Path) -> Result<(HorseRaceReport, RunManifest)> {
    let report = serde_json::from_str(&fs::read_to_string(dir.join(REPORT_FILE))?)?;
    let manifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
    Ok((report, manifest))
}
