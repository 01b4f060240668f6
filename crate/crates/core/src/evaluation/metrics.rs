use crate::error::{Error, Result};
use crate::stats::{rank, Direction};

fn check_pairs(forecasts: &[f64], actuals: &[f64]) -> Result<()> {
    if forecasts.len() != actuals.len() {
        return Err(Error::Input(format!(
            "{} forecasts but {} actuals",
            forecasts.len(),
            actuals.len()
        )));
    }
    if forecasts.is_empty() {
        return Err(Error::Length { needed: 1, got: 0 });
    }
    Ok(())
}

/// Mean squared forecast error.
pub fn msfe(forecasts: &[f64], actuals: &[f64]) -> Result<f64> {
    check_pairs(forecasts, actuals)?;
    let sum: f64 = forecasts.iter().zip(actuals).map(|(f, a)| (a - f) * (a - f)).sum();
    Ok(sum / forecasts.len() as f64)
}

/// Mean absolute forecast error.
pub fn mae(forecasts: &[f64], actuals: &[f64]) -> Result<f64> {
    check_pairs(forecasts, actuals)?;
    let sum: f64 = forecasts.iter().zip(actuals).map(|(f, a)| (a - f).abs()).sum();
    Ok(sum / forecasts.len() as f64)
}

/// Subtracts the global minimum of the table from every entry.
pub fn delta_scale(table: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut min = f64::INFINITY;
    let mut cells = 0;
    for row in table {
        for v in row {
            if !v.is_finite() {
                return Err(Error::Input(format!("non-finite score {v}")));
            }
            min = min.min(*v);
            cells += 1;
        }
    }
    if cells == 0 {
        return Err(Error::Input("empty score table".into()));
    }
    Ok(table.iter().map(|row| row.iter().map(|v| v - min).collect()).collect())
}

/// Like [`delta_scale`] for tables with missing cells, which stay missing.
pub fn delta_scale_sparse(table: &[Vec<Option<f64>>]) -> Result<Vec<Vec<Option<f64>>>> {
    let present: Vec<Vec<f64>> = table.iter().map(|row| row.iter().flatten().copied().collect()).collect();
    let scaled = delta_scale(&present)?;
    let min = present
        .iter()
        .zip(&scaled)
        .find_map(|(p, s)| p.first().zip(s.first()).map(|(a, b)| a - b))
        .expect("nonempty table");
    Ok(table
        .iter()
        .map(|row| row.iter().map(|v| v.map(|x| x - min)).collect())
        .collect())
}

/// Split-averaged predictability: the mean of per-split `msfe - rw_msfe`.
/// Negative values mean the covariate beats the random walk.
pub fn avg_predictability(delta_msfe: &[f64]) -> Result<f64> {
    if delta_msfe.is_empty() {
        return Err(Error::Length { needed: 1, got: 0 });
    }
    Ok(delta_msfe.iter().sum::<f64>() / delta_msfe.len() as f64)
}

/// Talk-versus-predictability score per covariate, with frequency rank 1 for
/// the most frequent covariate and predictability rank 1 for the best
/// predictor. The score is `predictability rank - frequency rank`: negative
/// values mark "undertalked" covariates that predict better than their
/// frequency suggests, positive values "overtalked" ones.
pub fn rank_difference(
    freq_ranks: &[(String, usize)],
    pred_ranks: &[(String, usize)],
) -> Result<Vec<(String, i64)>> {
    if freq_ranks.len() != pred_ranks.len() {
        return Err(Error::Input("frequency and predictability rank sets differ in size".into()));
    }
    freq_ranks
        .iter()
        .map(|(name, f)| {
            let p = pred_ranks
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, p)| *p)
                .ok_or_else(|| Error::Input(format!("no predictability rank for '{name}'")))?;
            Ok((name.clone(), p as i64 - *f as i64))
        })
        .collect()
}

/// Ranks of named scores.
pub fn named_ranks(scores: &[(String, f64)], direction: Direction) -> Result<Vec<(String, usize)>> {
    let values: Vec<f64> = scores.iter().map(|(_, v)| *v).collect();
    let ranks = rank(&values, direction)?;
    Ok(scores.iter().map(|(n, _)| n.clone()).zip(ranks).collect())
}

/// One cell of the vote grid: a covariate's metric in one split and the
/// paired random-walk metric over the same windows. `None` marks a void split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteCell {
    pub metric: Option<f64>,
    pub rw_metric: Option<f64>,
}

/// Mode-vote counts from a grid indexed `[covariate][split]`, where the
/// noise covariate's row is `rand_row`.
///
/// A covariate wins a split when its metric is strictly below both its
/// paired random-walk metric and the noise covariate's metric. The noise
/// covariate's own count only requires beating the random walk. Void cells
/// never win and void benchmarks are never beaten. Counts by split exclude
/// the noise covariate.
pub fn mode_vote(grid: &[Vec<VoteCell>], rand_row: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let rand = grid
        .get(rand_row)
        .ok_or_else(|| Error::Config("vote grid has no noise covariate row".into()))?;
    let s = rand.len();
    if grid.iter().any(|row| row.len() != s) {
        return Err(Error::Input("vote grid rows differ in length".into()));
    }
    let beats = |a: Option<f64>, b: Option<f64>| matches!((a, b), (Some(a), Some(b)) if a < b);
    let mut by_cov = vec![0; grid.len()];
    let mut by_split = vec![0; s];
    for (i, row) in grid.iter().enumerate() {
        for (v, cell) in row.iter().enumerate() {
            let over_rw = beats(cell.metric, cell.rw_metric);
            if i == rand_row {
                by_cov[i] += usize::from(over_rw);
            } else if over_rw && beats(cell.metric, rand[v].metric) {
                by_cov[i] += 1;
                by_split[v] += 1;
            }
        }
    }
    Ok((by_cov, by_split))
}
