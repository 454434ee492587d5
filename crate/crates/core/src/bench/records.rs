//! Output rows and their CSV / JSON serialization.
//!
//! Column order is the field order below and is part of the output
//! contract (plotting scripts address columns by name).

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nested::EstimatorKind;
use crate::optimizer::PlanRule;

use super::estimators::EstimatorId;
use super::stats::ErrorSummary;

/// One `(estimator, grid point)` cell of the RMSE-versus-cost benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub estimator: EstimatorId,
    pub kind: EstimatorKind,
    pub rule: PlanRule,
    pub grid_index: usize,
    /// Budget the plan was inverted from, when the grid is a budget grid.
    pub budget: Option<f64>,
    pub epsilon: f64,
    pub tau: f64,
    pub j: f64,
    pub k: f64,
    pub levels: usize,
    /// Allocation `q_r`, `;`-separated.
    pub q: String,
    /// Realized `J_r`, `;`-separated.
    pub outer_counts: String,
    pub planned_cost: f64,
    pub realized_cost: f64,
    pub mse_proxy: f64,
    pub replications: usize,
    pub seed: u64,
    pub cdf_threshold: f64,
    pub cdf_reference: f64,
    pub cdf_mean: f64,
    pub cdf_bias: f64,
    pub cdf_rmse: f64,
    pub cdf_rmse_low: f64,
    pub cdf_rmse_high: f64,
    pub quantile_level: f64,
    pub quantile_reference: f64,
    pub quantile_mean: f64,
    pub quantile_bias: f64,
    pub quantile_rmse: f64,
    pub quantile_rmse_low: f64,
    pub quantile_rmse_high: f64,
    /// Replications whose quantile root was not a unique crossing.
    pub quantile_flagged: usize,
}

impl BenchmarkRecord {
    pub fn cdf_summary(&self) -> ErrorSummary {
        ErrorSummary {
            replications: self.replications,
            mean: self.cdf_mean,
            bias: self.cdf_bias,
            mse: self.cdf_rmse * self.cdf_rmse,
            rmse: self.cdf_rmse,
            rmse_low: self.cdf_rmse_low,
            rmse_high: self.cdf_rmse_high,
        }
    }

    pub fn quantile_summary(&self) -> ErrorSummary {
        ErrorSummary {
            replications: self.replications,
            mean: self.quantile_mean,
            bias: self.quantile_bias,
            mse: self.quantile_rmse * self.quantile_rmse,
            rmse: self.quantile_rmse,
            rmse_low: self.quantile_rmse_low,
            rmse_high: self.quantile_rmse_high,
        }
    }
}

/// One `(tau, rule)` row of the tau sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauSweepRecord {
    pub tau: f64,
    pub budget: f64,
    pub kind: EstimatorKind,
    pub rule: PlanRule,
    /// `ok` or `infeasible`.
    pub status: String,
    pub epsilon: Option<f64>,
    pub j: Option<f64>,
    pub k: Option<f64>,
    pub levels: Option<usize>,
    pub planned_cost: Option<f64>,
    pub realized_cost: Option<f64>,
    pub replications: usize,
    pub seed: u64,
    pub cdf_mse: Option<f64>,
    pub cdf_rmse_low: Option<f64>,
    pub cdf_rmse_high: Option<f64>,
    /// `MSE(closed form) / MSE(optimized)` at this tau; same on both rows.
    pub efficiency: Option<f64>,
    pub efficiency_low: Option<f64>,
    pub efficiency_high: Option<f64>,
}

/// Column names of a record type, in output order.
pub fn csv_header<T: Serialize + Default>() -> Result<Vec<String>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(T::default()).map_err(ser)?;
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Serialization(e.to_string()))?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(text
        .lines()
        .next()
        .unwrap_or_default()
        .split(',')
        .map(str::to_string)
        .collect())
}

fn ser(e: csv::Error) -> Error {
    Error::Serialization(e.to_string())
}

pub fn write_csv<T: Serialize, W: Write>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(ser)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(ser)).collect()
}

pub fn write_json<T: Serialize, W: Write>(out: W, value: &T) -> Result<()> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| Error::Serialization(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

pub fn save_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_csv(BufWriter::new(File::create(path)?), rows)
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_json(BufWriter::new(File::create(path)?), value)
}

pub(crate) fn join(values: impl IntoIterator<Item = impl ToString>) -> String {
    values
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

impl Default for BenchmarkRecord {
    fn default() -> Self {
        Self {
            estimator: EstimatorId::Nested,
            kind: EstimatorKind::Nested,
            rule: PlanRule::Optimized,
            grid_index: 0,
            budget: None,
            epsilon: 0.0,
            tau: 0.0,
            j: 0.0,
            k: 0.0,
            levels: 0,
            q: String::new(),
            outer_counts: String::new(),
            planned_cost: 0.0,
            realized_cost: 0.0,
            mse_proxy: 0.0,
            replications: 0,
            seed: 0,
            cdf_threshold: 0.0,
            cdf_reference: 0.0,
            cdf_mean: 0.0,
            cdf_bias: 0.0,
            cdf_rmse: 0.0,
            cdf_rmse_low: 0.0,
            cdf_rmse_high: 0.0,
            quantile_level: 0.0,
            quantile_reference: 0.0,
            quantile_mean: 0.0,
            quantile_bias: 0.0,
            quantile_rmse: 0.0,
            quantile_rmse_low: 0.0,
            quantile_rmse_high: 0.0,
            quantile_flagged: 0,
        }
    }
}

impl Default for TauSweepRecord {
    fn default() -> Self {
        Self {
            tau: 0.0,
            budget: 0.0,
            kind: EstimatorKind::Ml2r,
            rule: PlanRule::Optimized,
            status: String::new(),
            epsilon: None,
            j: None,
            k: None,
            levels: None,
            planned_cost: None,
            realized_cost: None,
            replications: 0,
            seed: 0,
            cdf_mse: None,
            cdf_rmse_low: None,
            cdf_rmse_high: None,
            efficiency: None,
            efficiency_low: None,
            efficiency_high: None,
        }
    }
}
