use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::info;

use super::cv::{run_chain, WindowResult};
use super::metrics::{
    avg_predictability, delta_scale_sparse, mae, mode_vote, msfe, named_ranks, rank_difference, VoteCell,
};
use super::{make_noise_covariate, task_seed, RaceConfig, RAND_NAME, RW_NAME};
use crate::diagnostics::{bonferroni_adjust, default_lags, kpss, ljung_box, white_nn_test, TestResult};
use crate::error::{Error, Result};
use crate::series::{Panel, TimeSeries};
use crate::stats::{rank, Direction};

/// Losses of one split over its non-skipped windows, with the random walk
/// scored on exactly the same windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub msfe: f64,
    pub mae: f64,
    pub rw_msfe: f64,
    pub rw_mae: f64,
}

/// One covariate at one window length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub covariate_name: String,
    pub r: usize,
    pub p_attempted: usize,
    pub p_effective: usize,
    /// `None` when every window was skipped.
    pub metrics: Option<SplitMetrics>,
    pub mean_aic: Option<f64>,
    pub mean_bic: Option<f64>,
    /// Lower MSFE than the random walk.
    pub outperformed_rw: bool,
    /// Lower MSFE than both the random walk and the noise covariate.
    pub outperformed_rw_and_rand: bool,
    /// Forecast errors `actual - forecast` of the non-skipped windows.
    pub errors: Vec<f64>,
}

impl SplitSummary {
    pub fn skip_rate(&self) -> f64 {
        (self.p_attempted - self.p_effective) as f64 / self.p_attempted as f64
    }
}

/// The random walk arm at one window length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RwSplit {
    pub r: usize,
    pub p_attempted: usize,
    pub msfe: f64,
    pub mae: f64,
    pub mean_aic: Option<f64>,
    pub mean_bic: Option<f64>,
}

/// A row of the information-criterion table: split-averaged AIC and BIC of
/// the random walk and of the covariate's model, minus the global minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationRow {
    pub predictor: String,
    pub delta_aic_rw: Option<f64>,
    pub delta_aic: Option<f64>,
    pub delta_bic_rw: Option<f64>,
    pub delta_bic: Option<f64>,
    pub bic_rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictabilityRow {
    pub name: String,
    /// Split-averaged `msfe - rw_msfe`; negative beats the random walk.
    pub avg_delta_msfe: Option<f64>,
    pub avg_delta_mae: Option<f64>,
    pub predictability_rank: Option<usize>,
    /// Sum of the covariate's values over the panel.
    pub frequency: Option<f64>,
    pub frequency_rank: Option<usize>,
    pub rank_difference: Option<i64>,
}

/// Mode-vote counts by covariate (noise covariate included) and by window
/// length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteCounts {
    pub by_covariate: Vec<(String, usize)>,
    pub by_window: Vec<(usize, usize)>,
}

/// Tests on one split's out-of-sample forecast errors, raw and with the
/// Bonferroni adjustment across the splits of the covariate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDiagnostics {
    pub covariate_name: String,
    pub r: usize,
    pub outperformed_rw: bool,
    pub p: usize,
    pub mean_error: Option<f64>,
    pub ljung_box: Option<TestResult>,
    pub ljung_box_adj: Option<f64>,
    pub kpss: Option<TestResult>,
    pub kpss_adj: Option<f64>,
    pub white_nn: Option<TestResult>,
    pub white_nn_adj: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedWindow {
    pub covariate_name: String,
    pub r: usize,
    pub origin_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorseRaceReport {
    pub config: RaceConfig,
    pub t: usize,
    /// Covariates in panel order, followed by the noise covariate.
    pub covariates: Vec<String>,
    pub windows: Vec<usize>,
    /// Indexed `[covariate][split]`.
    pub splits: Vec<Vec<SplitSummary>>,
    pub rw: Vec<RwSplit>,
    /// One row per covariate, noise covariate included.
    pub information: Vec<InformationRow>,
    pub predictability: Vec<PredictabilityRow>,
    pub votes_msfe: VoteCounts,
    pub votes_mae: VoteCounts,
    /// Indexed `[covariate][split]`.
    pub diagnostics: Vec<Vec<SplitDiagnostics>>,
    pub skipped: Vec<SkippedWindow>,
}

impl HorseRaceReport {
    /// Fraction of attempted covariate windows that were skipped.
    pub fn skip_rate(&self) -> f64 {
        let (attempted, effective) = self
            .splits
            .iter()
            .flatten()
            .fold((0, 0), |(a, e), s| (a + s.p_attempted, e + s.p_effective));
        if attempted == 0 {
            0.0
        } else {
            (attempted - effective) as f64 / attempted as f64
        }
    }

    pub fn split(&self, covariate: &str, r: usize) -> Option<&SplitSummary> {
        let i = self.covariates.iter().position(|c| c == covariate)?;
        let v = self.windows.iter().position(|w| *w == r)?;
        Some(&self.splits[i][v])
    }

    pub fn votes(&self, covariate: &str) -> Option<usize> {
        self.votes_msfe.by_covariate.iter().find(|(n, _)| n == covariate).map(|(_, c)| *c)
    }
}

/// Runs the random walk arm, every covariate and the noise covariate over
/// the whole window grid and assembles the report.
///
/// Any noise covariate already in the panel is replaced by one drawn from
/// `config.seed`, so the report depends only on the real covariates and the
/// configuration. Chains of windows run in parallel on the current rayon
/// pool; results do not depend on the number of threads.
pub fn run_horse_race(panel: &Panel, config: &RaceConfig) -> Result<HorseRaceReport> {
    let t = panel.len();
    config.validate(t)?;
    if panel.covariate(RW_NAME).is_some() {
        return Err(Error::Config(format!("covariate name '{RW_NAME}' is reserved")));
    }
    let real: Vec<TimeSeries> = panel.covariates().iter().filter(|c| c.name() != RAND_NAME).cloned().collect();
    let panel = panel.with_covariates(real)?;
    let noise = make_noise_covariate(&panel, config.seed)?;
    let mut arms: Vec<Option<&TimeSeries>> = vec![None];
    arms.extend(panel.covariates().iter().map(Some));
    arms.push(Some(&noise));

    let grid = &config.window_grid;
    let tasks: Vec<(usize, usize)> = (0..arms.len()).flat_map(|a| (0..grid.len()).map(move |v| (a, v))).collect();
    info!(arms = arms.len(), windows = grid.len(), "starting horse race");
    let chains: Vec<Vec<WindowResult>> = tasks
        .par_iter()
        .map(|&(a, v)| run_chain(panel.target(), arms[a], grid[v], config))
        .collect::<Result<_>>()?;
    let chain = |a: usize, v: usize| &chains[a * grid.len() + v];

    let rw: Vec<RwSplit> = (0..grid.len()).map(|v| rw_split(chain(0, v), grid[v], t)).collect::<Result<_>>()?;
    let names: Vec<String> = arms[1..].iter().map(|a| a.expect("covariate arm").name().to_string()).collect();
    let rand_row = names.len() - 1;
    let mut splits: Vec<Vec<SplitSummary>> = (0..names.len())
        .map(|i| (0..grid.len()).map(|v| split_summary(chain(i + 1, v), &names[i], grid[v], t)).collect())
        .collect::<Result<_>>()?;
    for v in 0..grid.len() {
        let rand_msfe = splits[rand_row][v].metrics.map(|m| m.msfe);
        for (i, row) in splits.iter_mut().enumerate() {
            let s = &mut row[v];
            s.outperformed_rw_and_rand = if i == rand_row {
                s.outperformed_rw
            } else {
                s.outperformed_rw && matches!((s.metrics, rand_msfe), (Some(m), Some(r)) if m.msfe < r)
            };
        }
    }

    let votes_msfe = votes(&splits, &names, grid, rand_row, |m| (m.msfe, m.rw_msfe))?;
    let votes_mae = votes(&splits, &names, grid, rand_row, |m| (m.mae, m.rw_mae))?;
    let information = information_table(&splits, &rw, &names)?;
    let predictability = predictability_table(&splits, &panel, &names, rand_row)?;
    let diagnostics = splits
        .iter()
        .map(|row| split_diagnostics(row, config.seed))
        .collect::<Result<_>>()?;
    let skipped = chains
        .iter()
        .flatten()
        .filter(|w| w.skipped)
        .map(|w| SkippedWindow {
            covariate_name: w.covariate_name.clone(),
            r: w.r,
            origin_index: w.origin_index,
            reason: w.skip_reason.clone().unwrap_or_default(),
        })
        .collect();
    Ok(HorseRaceReport {
        config: config.clone(),
        t,
        covariates: names,
        windows: grid.clone(),
        splits,
        rw,
        information,
        predictability,
        votes_msfe,
        votes_mae,
        diagnostics,
        skipped,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn rw_split(windows: &[WindowResult], r: usize, t: usize) -> Result<RwSplit> {
    let kept: Vec<&WindowResult> = windows.iter().filter(|w| !w.skipped).collect();
    let forecasts: Vec<f64> = kept.iter().map(|w| w.rw_forecast).collect();
    let actuals: Vec<f64> = kept.iter().map(|w| w.actual).collect();
    Ok(RwSplit {
        r,
        p_attempted: t - r,
        msfe: msfe(&forecasts, &actuals)?,
        mae: mae(&forecasts, &actuals)?,
        mean_aic: mean(kept.iter().filter_map(|w| w.aic)),
        mean_bic: mean(kept.iter().filter_map(|w| w.bic)),
    })
}

fn split_summary(windows: &[WindowResult], name: &str, r: usize, t: usize) -> Result<SplitSummary> {
    let kept: Vec<&WindowResult> = windows.iter().filter(|w| !w.skipped).collect();
    let metrics = if kept.is_empty() {
        None
    } else {
        let forecasts: Vec<f64> = kept.iter().map(|w| w.forecast.expect("kept window has a forecast")).collect();
        let rw: Vec<f64> = kept.iter().map(|w| w.rw_forecast).collect();
        let actuals: Vec<f64> = kept.iter().map(|w| w.actual).collect();
        Some(SplitMetrics {
            msfe: msfe(&forecasts, &actuals)?,
            mae: mae(&forecasts, &actuals)?,
            rw_msfe: msfe(&rw, &actuals)?,
            rw_mae: mae(&rw, &actuals)?,
        })
    };
    Ok(SplitSummary {
        covariate_name: name.to_string(),
        r,
        p_attempted: t - r,
        p_effective: kept.len(),
        metrics,
        mean_aic: mean(kept.iter().filter_map(|w| w.aic)),
        mean_bic: mean(kept.iter().filter_map(|w| w.bic)),
        outperformed_rw: metrics.is_some_and(|m| m.msfe < m.rw_msfe),
        outperformed_rw_and_rand: false,
        errors: kept.iter().filter_map(|w| w.error()).collect(),
    })
}

fn votes(
    splits: &[Vec<SplitSummary>],
    names: &[String],
    grid: &[usize],
    rand_row: usize,
    pick: impl Fn(&SplitMetrics) -> (f64, f64),
) -> Result<VoteCounts> {
    let cells: Vec<Vec<VoteCell>> = splits
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| {
                    let m = s.metrics.as_ref().map(&pick);
                    VoteCell { metric: m.map(|m| m.0), rw_metric: m.map(|m| m.1) }
                })
                .collect()
        })
        .collect();
    let (by_cov, by_split) = mode_vote(&cells, rand_row)?;
    Ok(VoteCounts {
        by_covariate: names.iter().cloned().zip(by_cov).collect(),
        by_window: grid.iter().copied().zip(by_split).collect(),
    })
}

fn information_table(splits: &[Vec<SplitSummary>], rw: &[RwSplit], names: &[String]) -> Result<Vec<InformationRow>> {
    let rw_aic = mean(rw.iter().filter_map(|s| s.mean_aic));
    let rw_bic = mean(rw.iter().filter_map(|s| s.mean_bic));
    let aic: Vec<Option<f64>> = splits.iter().map(|row| mean(row.iter().filter_map(|s| s.mean_aic))).collect();
    let bic: Vec<Option<f64>> = splits.iter().map(|row| mean(row.iter().filter_map(|s| s.mean_bic))).collect();
    let scaled = |rw: Option<f64>, own: &[Option<f64>]| -> Result<Vec<Vec<Option<f64>>>> {
        let table: Vec<Vec<Option<f64>>> = own.iter().map(|v| vec![rw, *v]).collect();
        if table.iter().flatten().all(Option::is_none) {
            return Ok(table);
        }
        delta_scale_sparse(&table)
    };
    let daic = scaled(rw_aic, &aic)?;
    let dbic = scaled(rw_bic, &bic)?;
    let ranked: Vec<(usize, f64)> = bic.iter().enumerate().filter_map(|(i, b)| b.map(|b| (i, b))).collect();
    let ranks = if ranked.is_empty() {
        vec![]
    } else {
        rank(&ranked.iter().map(|(_, b)| *b).collect::<Vec<_>>(), Direction::Ascending)?
    };
    Ok(names
        .iter()
        .enumerate()
        .map(|(i, name)| InformationRow {
            predictor: name.clone(),
            delta_aic_rw: daic[i][0],
            delta_aic: daic[i][1],
            delta_bic_rw: dbic[i][0],
            delta_bic: dbic[i][1],
            bic_rank: ranked.iter().position(|(j, _)| *j == i).map(|k| ranks[k]),
        })
        .collect())
}

fn predictability_table(
    splits: &[Vec<SplitSummary>],
    panel: &Panel,
    names: &[String],
    rand_row: usize,
) -> Result<Vec<PredictabilityRow>> {
    let avg = |row: &[SplitSummary], pick: fn(&SplitMetrics) -> f64| {
        let deltas: Vec<f64> = row.iter().filter_map(|s| s.metrics.as_ref().map(pick)).collect();
        avg_predictability(&deltas).ok()
    };
    let mut rows: Vec<PredictabilityRow> = names
        .iter()
        .zip(splits)
        .enumerate()
        .map(|(i, (name, row))| PredictabilityRow {
            name: name.clone(),
            avg_delta_msfe: avg(row, |m| m.msfe - m.rw_msfe),
            avg_delta_mae: avg(row, |m| m.mae - m.rw_mae),
            predictability_rank: None,
            frequency: (i != rand_row)
                .then(|| panel.covariate(name).map(|c| c.values().iter().sum()))
                .flatten(),
            frequency_rank: None,
            rank_difference: None,
        })
        .collect();
    let ranked: Vec<usize> = (0..rows.len())
        .filter(|&i| i != rand_row && rows[i].avg_delta_msfe.is_some() && rows[i].frequency.is_some_and(f64::is_finite))
        .collect();
    if ranked.is_empty() {
        return Ok(rows);
    }
    let scores = |f: fn(&PredictabilityRow) -> Option<f64>| -> Vec<(String, f64)> {
        ranked.iter().map(|&i| (rows[i].name.clone(), f(&rows[i]).expect("ranked row"))).collect()
    };
    let pred = named_ranks(&scores(|r| r.avg_delta_msfe), Direction::Ascending)?;
    let freq = named_ranks(&scores(|r| r.frequency), Direction::Descending)?;
    let diff = rank_difference(&freq, &pred)?;
    for (k, &i) in ranked.iter().enumerate() {
        rows[i].predictability_rank = Some(pred[k].1);
        rows[i].frequency_rank = Some(freq[k].1);
        rows[i].rank_difference = Some(diff[k].1);
    }
    Ok(rows)
}

fn split_diagnostics(row: &[SplitSummary], seed: u64) -> Result<Vec<SplitDiagnostics>> {
    let s = row.len();
    let mut out: Vec<SplitDiagnostics> = row
        .iter()
        .map(|split| {
            let e = &split.errors;
            SplitDiagnostics {
                covariate_name: split.covariate_name.clone(),
                r: split.r,
                outperformed_rw: split.outperformed_rw,
                p: split.p_effective,
                mean_error: mean(e.iter().copied()),
                ljung_box: (e.len() > 5).then(|| ljung_box(e, default_lags(e.len()), 0).ok()).flatten(),
                ljung_box_adj: None,
                kpss: kpss(e).ok(),
                kpss_adj: None,
                white_nn: white_nn_test(e, 2, task_seed(seed, &split.covariate_name, split.r, usize::MAX)).ok(),
                white_nn_adj: None,
            }
        })
        .collect();
    let adjust = |p: Option<f64>| -> Result<Option<f64>> {
        p.map(|p| bonferroni_adjust(&[p], s).map(|v| v[0])).transpose()
    };
    for d in &mut out {
        d.ljung_box_adj = adjust(d.ljung_box.map(|t| t.p_value))?;
        d.kpss_adj = adjust(d.kpss.map(|t| t.p_value))?;
        d.white_nn_adj = adjust(d.white_nn.map(|t| t.p_value))?;
    }
    Ok(out)
}
