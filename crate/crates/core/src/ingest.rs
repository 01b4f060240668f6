//! CSV ingestion and preprocessing of panels.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use tracing::info;

use crate::config::RunConfig;
use crate::diagnostics::{breusch_pagan_with, TestResult};
use crate::error::{Error, Result};
use crate::series::{log_transform, near_zero_variance_filter, NzvMetrics, Panel, TimeSeries};

/// Dates dropped while aligning the target and covariate files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestLog {
    pub dropped_target_dates: Vec<NaiveDate>,
    pub dropped_covariate_dates: Vec<NaiveDate>,
}

struct Table {
    label: String,
    names: Vec<String>,
    rows: BTreeMap<NaiveDate, Vec<f64>>,
}

fn parse_table(text: &str, label: &str) -> Result<Table> {
    let ingest = |line: usize, message: String| Error::Ingest { file: label.to_string(), line, message };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| ingest(1, e.to_string()))?.clone();
    if header.len() < 2 || !header[0].eq_ignore_ascii_case("date") {
        return Err(ingest(1, "header must start with 'date' followed by value columns".into()));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut rows = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            ingest(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let date: NaiveDate = record[0]
            .parse()
            .map_err(|_| ingest(line, format!("invalid date '{}'", &record[0])))?;
        let values = record
            .iter()
            .skip(1)
            .zip(&names)
            .map(|(cell, name)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(ingest(line, format!("non-numeric value '{cell}' in column '{name}'"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        if rows.insert(date, values).is_some() {
            return Err(ingest(line, format!("duplicate date {date}")));
        }
    }
    if rows.is_empty() {
        return Err(ingest(1, "no data rows".into()));
    }
    Ok(Table { label: label.to_string(), names, rows })
}

/// Builds a panel from the text of a `date,value` target file and a wide
/// `date,<name>...` covariate file, aligned on the dates both cover.
/// A date missing inside the common range is a gap error.
pub fn panel_from_csv(target_csv: &str, covariates_csv: &str, labels: (&str, &str)) -> Result<(Panel, IngestLog)> {
    let target = parse_table(target_csv, labels.0)?;
    if target.names.len() != 1 {
        return Err(Error::Ingest {
            file: labels.0.to_string(),
            line: 1,
            message: "target file must have exactly the columns date,value".into(),
        });
    }
    let covs = parse_table(covariates_csv, labels.1)?;
    let first = |t: &Table| *t.rows.keys().next().expect("nonempty");
    let last = |t: &Table| *t.rows.keys().next_back().expect("nonempty");
    let lo = first(&target).max(first(&covs));
    let hi = last(&target).min(last(&covs));
    if lo > hi {
        return Err(Error::Index("target and covariate files share no dates".into()));
    }
    let mut dates = Vec::new();
    let mut day = lo;
    while day <= hi {
        for t in [&target, &covs] {
            if !t.rows.contains_key(&day) {
                return Err(Error::Gap { series: t.label.clone(), date: day });
            }
        }
        dates.push(day);
        day = day.succ_opt().expect("date in range");
    }
    let outside = |t: &Table| t.rows.keys().filter(|d| **d < lo || **d > hi).copied().collect();
    let log = IngestLog { dropped_target_dates: outside(&target), dropped_covariate_dates: outside(&covs) };
    let column = |t: &Table, j: usize| dates.iter().map(|d| t.rows[d][j]).collect::<Vec<f64>>();
    let y = TimeSeries::new(target.names[0].clone(), dates.clone(), column(&target, 0))?;
    let covariates = (0..covs.names.len())
        .map(|j| TimeSeries::new(covs.names[j].clone(), dates.clone(), column(&covs, j)))
        .collect::<Result<Vec<_>>>()?;
    Ok((Panel::new(y, covariates)?, log))
}

/// Reads the two CSV files of [`panel_from_csv`].
pub fn ingest_panel(target_path: &Path, covariates_path: &Path) -> Result<(Panel, IngestLog)> {
    let target = std::fs::read_to_string(target_path)?;
    let covs = std::fs::read_to_string(covariates_path)?;
    panel_from_csv(&target, &covs, (&target_path.display().to_string(), &covariates_path.display().to_string()))
}

/// The `date,value` target file and the wide covariate file of a panel.
/// Values use the shortest representation that parses back exactly.
pub fn panel_to_csv(panel: &Panel) -> (String, String) {
    let dates = panel.target().index();
    let mut target = String::from("date,value\n");
    for (d, v) in dates.iter().zip(panel.target().values()) {
        target.push_str(&format!("{d},{v}\n"));
    }
    let mut covs = String::from("date");
    for name in panel.covariate_names() {
        covs.push(',');
        covs.push_str(&name);
    }
    covs.push('\n');
    for (i, d) in dates.iter().enumerate() {
        covs.push_str(&d.to_string());
        for c in panel.covariates() {
            covs.push_str(&format!(",{}", c.values()[i]));
        }
        covs.push('\n');
    }
    (target, covs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovedCovariate {
    pub name: String,
    pub reason: String,
}

/// Everything [`preprocess`] did to a panel.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessLog {
    pub removed: Vec<RemovedCovariate>,
    pub breusch_pagan: Option<TestResult>,
    pub log_transformed: bool,
    pub actions: Vec<String>,
}

/// Near-zero-variance filtering of the covariates, then a log transform of
/// the target when Breusch-Pagan rejects homoscedasticity at `alpha_gate`.
pub fn preprocess(panel: &Panel, config: &RunConfig) -> Result<(Panel, PreprocessLog)> {
    let tf = &config.transforms;
    let mut log = PreprocessLog::default();
    let mut panel = panel.clone();
    if tf.near_zero_variance {
        let (kept, removed) = near_zero_variance_filter(&panel, tf.freq_ratio_cutoff, tf.unique_pct_cutoff)?;
        for name in removed {
            let m = NzvMetrics::compute(panel.covariate(&name).expect("removed covariate exists"));
            let reason = format!(
                "near-zero variance: frequency ratio {:.2} > {}, distinct values {:.2}% < {}%",
                m.freq_ratio, tf.freq_ratio_cutoff, m.unique_pct, tf.unique_pct_cutoff
            );
            log.actions.push(format!("removed covariate '{name}': {reason}"));
            log.removed.push(RemovedCovariate { name, reason });
        }
        panel = kept;
    }
    if tf.log_gate {
        let bp = breusch_pagan_with(panel.target().values(), tf.bp_base)?;
        log.breusch_pagan = Some(bp);
        if bp.rejects(config.alpha_gate) {
            panel = panel.with_target(log_transform(panel.target())?)?;
            log.log_transformed = true;
            log.actions.push(format!(
                "log-transformed target: Breusch-Pagan p = {:.4} <= {}",
                bp.p_value, config.alpha_gate
            ));
        } else {
            log.actions.push(format!("target kept on its scale: Breusch-Pagan p = {:.4}", bp.p_value));
        }
    }
    for action in &log.actions {
        info!("{action}");
    }
    Ok((panel, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TARGET: &str = "date,value\n2020-01-01,1.0\n2020-01-02,1.1\n2020-01-03,1.2\n2020-01-04,1.3\n";

    #[test]
    fn aligns_on_common_dates() {
        let covs = "date,a,b\n2020-01-02,1,2\n2020-01-03,3,4\n2020-01-04,5,6\n2020-01-05,7,8\n";
        let (p, log) = panel_from_csv(TARGET, covs, ("t.csv", "c.csv")).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.covariate_names(), vec!["a", "b"]);
        assert_eq!(p.covariate("b").unwrap().values(), &[2.0, 4.0, 6.0]);
        assert_eq!(log.dropped_target_dates, vec!["2020-01-01".parse::<NaiveDate>().unwrap()]);
        assert_eq!(log.dropped_covariate_dates.len(), 1);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let covs = "date,a,b\n2020-01-01,0.1,2\n2020-01-02,0.30000000000000004,4\n2020-01-03,5,6\n2020-01-04,7,8\n";
        let (p, _) = panel_from_csv(TARGET, covs, ("t", "c")).unwrap();
        let (t, c) = panel_to_csv(&p);
        let (q, _) = panel_from_csv(&t, &c, ("t", "c")).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn interior_gap_names_the_date() {
        let covs = "date,a\n2020-01-01,1\n2020-01-02,1\n2020-01-04,1\n";
        let err = panel_from_csv(TARGET, covs, ("t.csv", "c.csv")).unwrap_err();
        match err {
            Error::Gap { series, date } => {
                assert_eq!(series, "c.csv");
                assert_eq!(date.to_string(), "2020-01-03");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bad_cells_report_their_line() {
        let covs = "date,a\n2020-01-01,1\n2020-01-02,n/a\n";
        match panel_from_csv(TARGET, covs, ("t.csv", "c.csv")).unwrap_err() {
            Error::Ingest { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("n/a"));
            }
            other => panic!("unexpected {other}"),
        }
        let dup = "date,a\n2020-01-01,1\n2020-01-01,2\n";
        assert!(matches!(panel_from_csv(TARGET, dup, ("t", "c")), Err(Error::Ingest { line: 3, .. })));
        let bad_date = "date,a\n01/01/2020,1\n";
        assert!(matches!(panel_from_csv(TARGET, bad_date, ("t", "c")), Err(Error::Ingest { line: 2, .. })));
    }
}
