//! Experiment drivers: configuration, the five-estimator benchmark, the tau
//! sweep, output records and run manifests.

mod config;
mod estimators;
mod manifest;
mod records;
mod runner;
pub mod stats;

pub use config::{
    load_constants, BenchmarkConfig, CalibrationConfig, EstimatorKindName, ExperimentConfig,
    OutputConfig, ProblemConfig, ProblemKind, TargetConfig, TauSweepConfig, SCHEMA_VERSION,
};
pub use estimators::{plan_for_rule, EstimatorId};
pub use manifest::{config_hash, Manifest, STREAM_LAYOUT};
pub use records::{
    csv_header, read_csv, save_csv, save_json, write_csv, write_json, BenchmarkRecord,
    TauSweepRecord,
};
pub use runner::{
    cell_seed, run_benchmark, run_replications, run_tau_sweep, CellResult, GridPoint, References,
    TauSweepOutput, COST_TOLERANCE, EFFICIENCY_CONFIDENCE,
};
