//! Daily time-series containers and the transforms applied before estimation.

use std::collections::{HashMap, HashSet};

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An equally spaced daily series.
///
/// The index is strictly increasing with a one-day step and has the same
/// length as the values. Values are always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    name: String,
    index: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Builds a series, checking the daily-index and finiteness invariants.
    pub fn new(name: impl Into<String>, index: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if index.len() != values.len() {
            return Err(Error::Index(format!(
                "'{name}': {} dates but {} values",
                index.len(),
                values.len()
            )));
        }
        for w in index.windows(2) {
            let expected = w[0] + Days::new(1);
            if w[1] == expected {
                continue;
            }
            if w[1] > expected {
                return Err(Error::Gap {
                    series: name,
                    date: expected,
                });
            }
            return Err(Error::Index(format!(
                "'{name}': dates not strictly increasing at {}",
                w[1]
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "'{name}': non-finite value at {}",
                index[i]
            )));
        }
        Ok(Self {
            name,
            index,
            values,
        })
    }

    /// Builds a series with consecutive dates starting at `start`.
    pub fn from_start(name: impl Into<String>, start: NaiveDate, values: Vec<f64>) -> Result<Self> {
        let index = (0..values.len() as u64)
            .map(|i| start + Days::new(i))
            .collect();
        Self::new(name, index, values)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn index(&self) -> &[NaiveDate] {
        &self.index
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.index.last().copied()
    }

    /// Same index and name, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.name.clone(), self.index.clone(), values)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Contiguous sub-series `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            name: self.name.clone(),
            index: self.index[start..end].to_vec(),
            values: self.values[start..end].to_vec(),
        }
    }

    /// The series shifted forward by `lag` days: the value at date `t` is the
    /// original value at `t - lag`. The first `lag` dates are dropped.
    pub fn lagged(&self, lag: usize) -> Self {
        let n = self.len().saturating_sub(lag);
        Self {
            name: self.name.clone(),
            index: self.index[lag.min(self.len())..].to_vec(),
            values: self.values[..n].to_vec(),
        }
    }
}

/// A target series together with covariates on the same daily index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    target: TimeSeries,
    covariates: Vec<TimeSeries>,
}

impl Panel {
    pub fn new(target: TimeSeries, covariates: Vec<TimeSeries>) -> Result<Self> {
        if target.len() < 2 {
            return Err(Error::Length {
                needed: 2,
                got: target.len(),
            });
        }
        let mut seen = HashSet::new();
        for c in &covariates {
            if c.index() != target.index() {
                return Err(Error::Index(format!(
                    "covariate '{}' does not share the target index",
                    c.name()
                )));
            }
            if !seen.insert(c.name()) {
                return Err(Error::Input(format!("duplicate covariate name '{}'", c.name())));
            }
        }
        Ok(Self { target, covariates })
    }

    pub fn target(&self) -> &TimeSeries {
        &self.target
    }

    pub fn covariates(&self) -> &[TimeSeries] {
        &self.covariates
    }

    pub fn covariate(&self, name: &str) -> Option<&TimeSeries> {
        self.covariates.iter().find(|c| c.name() == name)
    }

    pub fn covariate_names(&self) -> Vec<String> {
        self.covariates.iter().map(|c| c.name().to_owned()).collect()
    }

    /// Number of observations `T`.
    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn with_target(&self, target: TimeSeries) -> Result<Self> {
        Self::new(target, self.covariates.clone())
    }

    pub fn with_covariates(&self, covariates: Vec<TimeSeries>) -> Result<Self> {
        Self::new(self.target.clone(), covariates)
    }
}

/// Elementwise natural logarithm.
pub fn log_transform(series: &TimeSeries) -> Result<TimeSeries> {
    if let Some(i) = series.values().iter().position(|&v| v <= 0.0) {
        return Err(Error::Domain {
            series: series.name().to_owned(),
            date: series.index()[i],
            message: format!("log of non-positive value {}", series.values()[i]),
        });
    }
    series.with_values(series.values().iter().map(|v| v.ln()).collect())
}

/// Applies `(1 - B)^d` to raw values.
pub fn difference_values(values: &[f64], d: usize) -> Vec<f64> {
    let mut out = values.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    out
}

/// Applies `(1 - B^period)^d` to raw values.
pub fn seasonal_difference_values(values: &[f64], period: usize, d: usize) -> Vec<f64> {
    let mut out = values.to_vec();
    for _ in 0..d {
        out = (period..out.len()).map(|i| out[i] - out[i - period]).collect();
    }
    out
}

/// `d`-th order differences of a series; the first `d` dates are dropped.
pub fn difference(series: &TimeSeries, d: usize) -> Result<TimeSeries> {
    if series.len() <= d {
        return Err(Error::Length {
            needed: d + 1,
            got: series.len(),
        });
    }
    TimeSeries::new(
        series.name(),
        series.index()[d..].to_vec(),
        difference_values(series.values(), d),
    )
}

/// Outcome of the near-zero-variance screen for one covariate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NzvMetrics {
    pub name: String,
    /// Count of the most common value over the count of the second most common.
    /// Zero when the series takes a single value.
    pub freq_ratio: f64,
    /// Distinct values as a percentage of the series length.
    pub unique_pct: f64,
    pub zero_variance: bool,
}

impl NzvMetrics {
    pub fn compute(series: &TimeSeries) -> Self {
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for &v in series.values() {
            // +0.0 and -0.0 are the same observation
            let key = if v == 0.0 { 0u64 } else { v.to_bits() };
            *counts.entry(key).or_default() += 1;
        }
        let mut freq: Vec<usize> = counts.values().copied().collect();
        freq.sort_unstable_by(|a, b| b.cmp(a));
        let freq_ratio = match freq.as_slice() {
            [first, second, ..] => *first as f64 / *second as f64,
            _ => 0.0,
        };
        Self {
            name: series.name().to_owned(),
            freq_ratio,
            unique_pct: 100.0 * counts.len() as f64 / series.len().max(1) as f64,
            zero_variance: counts.len() <= 1,
        }
    }

    pub fn is_near_zero_variance(&self, freq_ratio_cutoff: f64, unique_pct_cutoff: f64) -> bool {
        self.zero_variance
            || (self.freq_ratio > freq_ratio_cutoff && self.unique_pct < unique_pct_cutoff)
    }
}

/// Drops covariates with zero or near-zero variance. The target is never removed
/// and the surviving covariates keep their order. `unique_pct_cutoff` is a percentage.
pub fn near_zero_variance_filter(
    panel: &Panel,
    freq_ratio_cutoff: f64,
    unique_pct_cutoff: f64,
) -> Result<(Panel, Vec<String>)> {
    if freq_ratio_cutoff <= 0.0 || unique_pct_cutoff <= 0.0 {
        return Err(Error::Input("near-zero-variance cutoffs must be positive".into()));
    }
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for c in panel.covariates() {
        if NzvMetrics::compute(c).is_near_zero_variance(freq_ratio_cutoff, unique_pct_cutoff) {
            removed.push(c.name().to_owned());
        } else {
            kept.push(c.clone());
        }
    }
    Ok((panel.with_covariates(kept)?, removed))
}
