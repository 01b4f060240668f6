use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::fit::{css_aicc, fit_from, FitOptions};
use super::{ArimaOrder, FittedModel};
use crate::diagnostics::kpss;
use crate::error::{Error, Result};
use crate::regression::{design, ols};
use crate::series::{difference_values, seasonal_difference_values, TimeSeries};

const MIN_LEN: usize = 30;

/// Bounds and rules of the automatic order search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    pub max_p: usize,
    pub max_q: usize,
    pub max_seasonal_p: usize,
    pub max_seasonal_q: usize,
    /// Upper bound on `p + q + P + Q`.
    pub max_order: usize,
    pub max_d: usize,
    pub max_seasonal_d: usize,
    /// Candidate seasonal period; 0 disables the seasonal search.
    pub seasonal_period: usize,
    pub seasonal_strength_threshold: f64,
    pub kpss_alpha: f64,
    /// Consider a mean (`d + D = 0`) or drift (`d + D = 1`) term.
    pub allow_constant: bool,
    /// Cap on the number of distinct models estimated.
    pub max_models: usize,
    /// Rank candidate orders by conditional sum of squares and estimate only
    /// the winners by exact maximum likelihood.
    pub approximation: bool,
    pub fit: FitOptions,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            max_p: 5,
            max_q: 5,
            max_seasonal_p: 2,
            max_seasonal_q: 2,
            max_order: 5,
            max_d: 2,
            max_seasonal_d: 1,
            seasonal_period: 0,
            seasonal_strength_threshold: 0.64,
            kpss_alpha: 0.05,
            allow_constant: true,
            max_models: 94,
            approximation: true,
            fit: FitOptions::default(),
        }
    }
}

/// Number of differences needed for KPSS to stop rejecting level
/// stationarity at `alpha`, capped at `max_d`.
pub fn ndiffs(values: &[f64], alpha: f64, max_d: usize) -> Result<usize> {
    let mut x = values.to_vec();
    let mut d = 0;
    while d < max_d {
        let first = x[0];
        if x.iter().all(|v| *v == first) {
            break;
        }
        if kpss(&x)?.p_value >= alpha {
            break;
        }
        x = difference_values(&x, 1);
        d += 1;
    }
    Ok(d)
}

/// Strength of seasonality from a classical additive decomposition:
/// `max(0, 1 - var(remainder) / var(seasonal + remainder))`.
pub fn seasonal_strength(values: &[f64], period: usize) -> Result<f64> {
    let n = values.len();
    if period < 2 || n < 2 * period + 1 {
        return Err(Error::Length { needed: 2 * period + 1, got: n });
    }
    let half = period / 2;
    let mut trend = vec![f64::NAN; n];
    for t in half..n - half {
        trend[t] = if period % 2 == 1 {
            values[t - half..=t + half].iter().sum::<f64>() / period as f64
        } else {
            if t + half >= n {
                continue;
            }
            let inner: f64 = values[t - half + 1..t + half].iter().sum();
            (inner + 0.5 * (values[t - half] + values[t + half])) / period as f64
        };
    }
    let mut season_sum = vec![0.0; period];
    let mut season_count = vec![0usize; period];
    for t in 0..n {
        if trend[t].is_finite() {
            season_sum[t % period] += values[t] - trend[t];
            season_count[t % period] += 1;
        }
    }
    let mut season: Vec<f64> = season_sum
        .iter()
        .zip(&season_count)
        .map(|(s, c)| if *c > 0 { s / *c as f64 } else { 0.0 })
        .collect();
    let centre = season.iter().sum::<f64>() / period as f64;
    season.iter_mut().for_each(|s| *s -= centre);
    let mut detrended = Vec::new();
    let mut remainder = Vec::new();
    for t in 0..n {
        if trend[t].is_finite() {
            let dt = values[t] - trend[t];
            detrended.push(dt);
            remainder.push(dt - season[t % period]);
        }
    }
    let var = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
    };
    let total = var(&detrended);
    if !(total > 0.0) {
        return Ok(0.0);
    }
    Ok((1.0 - var(&remainder) / total).max(0.0))
}

/// The series whose integration order is tested: the target itself, or the
/// residuals of its regression on the covariates.
fn unit_root_base(target: &TimeSeries, covariates: &[TimeSeries]) -> Result<Vec<f64>> {
    if covariates.is_empty() {
        return Ok(target.values().to_vec());
    }
    let n = target.len();
    let ones = vec![1.0; n];
    let mut cols: Vec<&[f64]> = vec![&ones];
    cols.extend(covariates.iter().map(|c| c.values()));
    Ok(ols(target.values(), &design(&cols))?.residuals)
}

fn information(model: &FittedModel) -> f64 {
    if model.degenerate || model.boundary || !model.aicc.is_finite() {
        f64::INFINITY
    } else {
        model.aicc
    }
}

/// Parameter estimates carried between related searches, such as
/// consecutive rolling windows, so the optimiser starts near the optimum.
#[derive(Debug, Clone, Default)]
pub struct WarmStart {
    css: HashMap<ArimaOrder, Vec<f64>>,
    ml: HashMap<ArimaOrder, Vec<f64>>,
}

struct Search<'a> {
    target: &'a TimeSeries,
    covariates: &'a [TimeSeries],
    config: &'a SelectionConfig,
    warm: &'a mut WarmStart,
    css_raw: HashMap<ArimaOrder, Vec<f64>>,
    scores: HashMap<ArimaOrder, Option<f64>>,
    models: HashMap<ArimaOrder, FittedModel>,
    degenerate: Option<FittedModel>,
    last_error: Option<Error>,
}

impl Search<'_> {
    fn admissible(&self, o: &ArimaOrder) -> bool {
        let c = self.config;
        o.p <= c.max_p
            && o.q <= c.max_q
            && o.seasonal_p <= c.max_seasonal_p
            && o.seasonal_q <= c.max_seasonal_q
            && o.n_arma() <= c.max_order
    }

    fn estimate(&mut self, order: &ArimaOrder) -> Option<f64> {
        let start = self.warm.ml.get(order).or_else(|| self.css_raw.get(order));
        match fit_from(self.target, self.covariates, order, &self.config.fit, start.map(|v| v.as_slice())) {
            Ok((model, raw)) => {
                self.warm.ml.insert(*order, raw);
                if model.degenerate && self.degenerate.is_none() {
                    self.degenerate = Some(model.clone());
                }
                let ic = information(&model);
                if ic.is_finite() {
                    self.models.insert(*order, model);
                    Some(ic)
                } else {
                    None
                }
            }
            Err(e) => {
                self.last_error = Some(e);
                None
            }
        }
    }

    /// Score of `order`, computed on first use.
    fn score(&mut self, order: ArimaOrder) -> Option<f64> {
        if !self.admissible(&order) {
            return None;
        }
        if let Some(entry) = self.scores.get(&order) {
            return *entry;
        }
        if self.scores.len() >= self.config.max_models {
            return None;
        }
        let score = if self.config.approximation {
            let start = self.warm.css.get(&order).map(|v| v.as_slice());
            match css_aicc(self.target, self.covariates, &order, &self.config.fit, start) {
                Ok((ic, raw)) => {
                    self.warm.css.insert(order, raw.clone());
                    self.css_raw.insert(order, raw);
                    ic.is_finite().then_some(ic)
                }
                Err(e) => {
                    self.last_error = Some(e);
                    None
                }
            }
        } else {
            self.estimate(&order)
        };
        self.scores.insert(order, score);
        score
    }

    /// The best-scoring order that also estimates cleanly by exact maximum
    /// likelihood.
    fn finish(mut self) -> Result<FittedModel> {
        let mut ranked: Vec<(f64, ArimaOrder)> = self
            .scores
            .iter()
            .filter_map(|(o, s)| s.map(|s| (s, *o)))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, order) in ranked {
            if let Some(model) = self.models.remove(&order) {
                return Ok(model);
            }
            if self.config.approximation && self.estimate(&order).is_some() {
                return Ok(self.models.remove(&order).expect("estimated model is stored"));
            }
        }
        if let Some(model) = self.degenerate {
            return Ok(model);
        }
        Err(Error::Selection(match self.last_error {
            Some(e) => format!("no candidate model could be estimated; last failure: {e}"),
            None => "no admissible candidate model".into(),
        }))
    }
}

fn neighbours(o: &ArimaOrder, seasonal: bool, constant_allowed: bool) -> Vec<ArimaOrder> {
    let mut out = Vec::new();
    let shifts: [(isize, isize); 8] = [(-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (1, 1), (-1, 1), (1, -1)];
    let add = |v: usize, d: isize| -> Option<usize> { v.checked_add_signed(d) };
    for (dp, dq) in shifts {
        if let (Some(p), Some(q)) = (add(o.p, dp), add(o.q, dq)) {
            out.push(ArimaOrder { p, q, ..*o });
        }
    }
    if seasonal {
        for (dp, dq) in shifts {
            if let (Some(sp), Some(sq)) = (add(o.seasonal_p, dp), add(o.seasonal_q, dq)) {
                out.push(ArimaOrder {
                    seasonal_p: sp,
                    seasonal_q: sq,
                    ..*o
                });
            }
        }
    }
    if constant_allowed {
        out.push(ArimaOrder {
            constant: !o.constant,
            ..*o
        });
    }
    out
}

/// Selects and estimates a (regression with) ARIMA model: differencing by
/// repeated KPSS tests, seasonal differencing by seasonal strength, then a
/// stepwise search over ARMA orders minimising the corrected AIC.
///
/// Candidates that fail to estimate or land on the stationarity boundary are
/// discarded. If every candidate is degenerate (zero innovation variance) the
/// degenerate fit is returned so the caller can recognise it.
pub fn auto_fit(target: &TimeSeries, covariates: &[TimeSeries], config: &SelectionConfig) -> Result<FittedModel> {
    auto_fit_warm(target, covariates, config, &mut WarmStart::default())
}

/// [`auto_fit`] with optimiser starting values taken from, and written back
/// to, `warm`. The selected model can differ from a cold start only through
/// optimiser tolerance.
pub fn auto_fit_warm(
    target: &TimeSeries,
    covariates: &[TimeSeries],
    config: &SelectionConfig,
    warm: &mut WarmStart,
) -> Result<FittedModel> {
    if target.len() < MIN_LEN {
        return Err(Error::Length { needed: MIN_LEN, got: target.len() });
    }
    let base = unit_root_base(target, covariates)?;
    let period = config.seasonal_period;
    let seasonal_d = if period >= 2 && config.max_seasonal_d > 0 {
        match seasonal_strength(&base, period) {
            Ok(s) if s > config.seasonal_strength_threshold => 1,
            _ => 0,
        }
    } else {
        0
    };
    let after_seasonal = if seasonal_d > 0 {
        seasonal_difference_values(&base, period, seasonal_d)
    } else {
        base
    };
    let max_d = config.max_d.min(3 - seasonal_d);
    let d = ndiffs(&after_seasonal, config.kpss_alpha, max_d)?;
    let seasonal = period >= 2;
    let constant_allowed = config.allow_constant && d + seasonal_d <= 1;

    let mut search = Search {
        target,
        covariates,
        config,
        warm,
        css_raw: HashMap::new(),
        scores: HashMap::new(),
        models: HashMap::new(),
        degenerate: None,
        last_error: None,
    };
    let base_order = ArimaOrder {
        period: if seasonal { period } else { 0 },
        seasonal_d,
        ..ArimaOrder::new(0, d, 0)
    };
    let (sp, sq) = if seasonal { (1, 1) } else { (0, 0) };
    let mut starts = vec![
        ArimaOrder {
            p: 2.min(config.max_p),
            q: 2.min(config.max_q),
            seasonal_p: sp.min(config.max_seasonal_p),
            seasonal_q: sq.min(config.max_seasonal_q),
            constant: constant_allowed,
            ..base_order
        },
        ArimaOrder {
            constant: constant_allowed,
            ..base_order
        },
        ArimaOrder {
            p: 1.min(config.max_p),
            seasonal_p: sp.min(config.max_seasonal_p),
            constant: constant_allowed,
            ..base_order
        },
        ArimaOrder {
            q: 1.min(config.max_q),
            seasonal_q: sq.min(config.max_seasonal_q),
            constant: constant_allowed,
            ..base_order
        },
    ];
    if constant_allowed {
        starts.push(base_order);
    }

    let mut best: Option<(f64, ArimaOrder)> = None;
    for order in starts {
        if let Some(ic) = search.score(order) {
            if best.map_or(true, |(b, _)| ic < b) {
                best = Some((ic, order));
            }
        }
    }
    if let Some((mut best_ic, mut best_order)) = best {
        'outer: loop {
            for cand in neighbours(&best_order, seasonal, constant_allowed) {
                if let Some(ic) = search.score(cand) {
                    if ic < best_ic {
                        best_ic = ic;
                        best_order = cand;
                        continue 'outer;
                    }
                }
            }
            break;
        }
    }
    search.finish()
}

/// The order chosen by [`auto_fit`].
pub fn auto_select_order(
    target: &TimeSeries,
    covariates: &[TimeSeries],
    config: &SelectionConfig,
) -> Result<ArimaOrder> {
    auto_fit(target, covariates, config).map(|m| m.order)
}
