//! Rolling-origin forecast horse race between regression-with-ARIMA-errors
//! models and the random walk benchmark.

pub mod arima;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evaluation;
pub mod ingest;
mod regression;
pub mod report;
pub mod series;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use series::{Panel, TimeSeries};
