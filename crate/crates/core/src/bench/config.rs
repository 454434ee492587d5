//! Experiment configuration (TOML).
//!
//! ```toml
//! schema_version = 1
//! seed = 42
//!
//! [problem]
//! tau = 0.0
//! [problem.market]
//! r = 0.05
//!
//! [constants]          # or `constants_file = "calibration.json"`
//! c1 = 0.025
//!
//! [benchmark]
//! budgets = [1e5, 1e6, 1e7]
//! replications = 64
//! ```
//!
//! Every section is optional; missing values take the benchmark defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::alm::{AlmModel, ContractParams, MarketParams};
use crate::calibration::{CalibrationReport, PilotConfig};
use crate::error::{Error, Result};
use crate::optimizer::{StructuralConstants, DEFAULT_K_FLOOR};

use super::estimators::EstimatorId;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 lets rayon decide.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub problem: ProblemConfig,
    /// Literal constants; `tau` is taken from `problem.tau`.
    #[serde(default)]
    pub constants: Option<StructuralConstants>,
    /// Constants or calibration report (JSON or TOML).
    #[serde(default)]
    pub constants_file: Option<PathBuf>,
    #[serde(default)]
    pub targets: TargetConfig,
    #[serde(default)]
    pub calibration: CalibrationConfig,
    #[serde(default)]
    pub benchmark: BenchmarkConfig,
    #[serde(default)]
    pub tau_sweep: TauSweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ProblemKind {
    Alm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "default_problem_kind")]
    pub kind: ProblemKind,
    #[serde(default)]
    pub tau: f64,
    #[serde(default)]
    pub market: MarketParams,
    #[serde(default)]
    pub contract: ContractParams,
}

fn default_problem_kind() -> ProblemKind {
    ProblemKind::Alm
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            kind: ProblemKind::Alm,
            tau: 0.0,
            market: MarketParams::default(),
            contract: ContractParams::default(),
        }
    }
}

/// Estimation targets. The threshold and the references default to the
/// closed-form loss quantile at `quantile_level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    #[serde(default = "default_level")]
    pub quantile_level: f64,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub reference_cdf: Option<f64>,
    #[serde(default)]
    pub reference_quantile: Option<f64>,
}

fn default_level() -> f64 {
    0.995
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self {
            quantile_level: default_level(),
            threshold: None,
            reference_cdf: None,
            reference_quantile: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    #[serde(default = "default_k_grid")]
    pub k_grid: Vec<u64>,
    #[serde(default = "default_n_pilot")]
    pub n_pilot: u64,
    #[serde(default = "default_true")]
    pub include_c2: bool,
}

fn default_k_grid() -> Vec<u64> {
    vec![8, 16, 32, 64, 128]
}

fn default_n_pilot() -> u64 {
    100_000
}

fn default_true() -> bool {
    true
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            k_grid: default_k_grid(),
            n_pilot: default_n_pilot(),
            include_c2: true,
        }
    }
}

impl CalibrationConfig {
    pub fn pilot(&self, seed: u64) -> PilotConfig {
        PilotConfig {
            k_grid: self.k_grid.clone(),
            n_pilot: self.n_pilot,
            seed,
            include_c2: self.include_c2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default = "EstimatorId::all")]
    pub estimators: Vec<EstimatorId>,
    /// Computational budgets, inverted to a precision per estimator.
    #[serde(default = "default_budgets")]
    pub budgets: Option<Vec<f64>>,
    /// Target precisions; when present they replace the budget grid.
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_k_floor")]
    pub k_floor: u64,
}

fn default_budgets() -> Option<Vec<f64>> {
    Some(vec![1e5, 1e6, 1e7])
}

fn default_replications() -> usize {
    64
}

fn default_k_floor() -> u64 {
    DEFAULT_K_FLOOR
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            estimators: EstimatorId::all(),
            budgets: default_budgets(),
            epsilons: None,
            replications: default_replications(),
            k_floor: DEFAULT_K_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauSweepConfig {
    #[serde(default = "default_sweep_budget")]
    pub budget: f64,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Multi-level kind compared across the two parameter rules.
    #[serde(default = "default_sweep_kind")]
    pub kind: EstimatorKindName,
    #[serde(default = "default_k_floor")]
    pub k_floor: u64,
}

/// `ml2r` or `mlmc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKindName {
    Ml2r,
    Mlmc,
}

fn default_sweep_budget() -> f64 {
    1e6
}

fn default_taus() -> Vec<f64> {
    vec![0.0, 25.0, 50.0, 75.0, 100.0]
}

fn default_sweep_kind() -> EstimatorKindName {
    EstimatorKindName::Ml2r
}

impl Default for TauSweepConfig {
    fn default() -> Self {
        Self {
            budget: default_sweep_budget(),
            taus: default_taus(),
            replications: default_replications(),
            kind: EstimatorKindName::Ml2r,
            k_floor: DEFAULT_K_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            threads: 0,
            problem: ProblemConfig::default(),
            constants: None,
            constants_file: None,
            targets: TargetConfig::default(),
            calibration: CalibrationConfig::default(),
            benchmark: BenchmarkConfig::default(),
            tau_sweep: TauSweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(
            path,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn non_empty<T>(path: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(Error::config(path, "must not be empty"))
    } else {
        Ok(())
    }
}

impl ExperimentConfig {
    /// Parses TOML; type errors carry the offending field path.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de =
            toml::Deserializer::parse(text).map_err(|e| Error::config("<root>", e.to_string()))?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a file; a relative `constants_file` is resolved against the
    /// config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let (Some(f), Some(dir)) = (&cfg.constants_file, path.parent()) {
            if f.is_relative() {
                cfg.constants_file = Some(dir.join(f));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if !(self.problem.tau >= 0.0 && self.problem.tau.is_finite()) {
            return Err(Error::config("problem.tau", "must be >= 0"));
        }
        self.problem
            .market
            .validate()
            .map_err(|e| Error::config("problem.market", e.to_string()))?;
        self.problem
            .contract
            .validate()
            .map_err(|e| Error::config("problem.contract", e.to_string()))?;
        if self.constants.is_some() && self.constants_file.is_some() {
            return Err(Error::config(
                "constants_file",
                "give either `constants` or `constants_file`, not both",
            ));
        }
        if let Some(c) = &self.constants {
            c.validate()
                .map_err(|e| Error::config("constants", e.to_string()))?;
        }
        let p = self.targets.quantile_level;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::config(
                "targets.quantile_level",
                "must lie in (0, 1)",
            ));
        }
        self.calibration
            .pilot(0)
            .validate()
            .map_err(|e| Error::config("calibration", e.to_string()))?;

        let b = &self.benchmark;
        non_empty("benchmark.estimators", &b.estimators)?;
        match (&b.budgets, &b.epsilons) {
            (None, None) => {
                return Err(Error::config(
                    "benchmark.budgets",
                    "a budget or epsilon grid is required",
                ))
            }
            (Some(g), None) => {
                non_empty("benchmark.budgets", g)?;
                for (i, v) in g.iter().enumerate() {
                    positive(&format!("benchmark.budgets[{i}]"), *v)?;
                }
            }
            (_, Some(g)) => {
                non_empty("benchmark.epsilons", g)?;
                for (i, v) in g.iter().enumerate() {
                    positive(&format!("benchmark.epsilons[{i}]"), *v)?;
                }
            }
        }
        if b.replications < 2 {
            return Err(Error::config(
                "benchmark.replications",
                "must be at least 2",
            ));
        }
        if b.k_floor == 0 {
            return Err(Error::config("benchmark.k_floor", "must be at least 1"));
        }

        let t = &self.tau_sweep;
        positive("tau_sweep.budget", t.budget)?;
        non_empty("tau_sweep.taus", &t.taus)?;
        for (i, v) in t.taus.iter().enumerate() {
            if !(*v >= 0.0 && v.is_finite()) {
                return Err(Error::config(
                    format!("tau_sweep.taus[{i}]"),
                    "must be >= 0",
                ));
            }
        }
        if t.replications < 2 {
            return Err(Error::config(
                "tau_sweep.replications",
                "must be at least 2",
            ));
        }
        if t.k_floor == 0 {
            return Err(Error::config("tau_sweep.k_floor", "must be at least 1"));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<AlmModel> {
        AlmModel::new(self.problem.market, self.problem.contract)
    }

    /// Structural constants at `tau`: literal, from file, or the benchmark
    /// reference values.
    pub fn structural_constants(&self, tau: f64) -> Result<StructuralConstants> {
        let c = match (&self.constants, &self.constants_file) {
            (Some(c), _) => c.clone(),
            (None, Some(path)) => load_constants(path)?,
            (None, None) => StructuralConstants::alm_reference(tau),
        };
        let c = c.with_tau(tau);
        c.validate()
            .map_err(|e| Error::config("constants", e.to_string()))?;
        Ok(c)
    }
}

/// Reads structural constants from a constants file or a calibration
/// report, in JSON or TOML.
pub fn load_constants(path: &Path) -> Result<StructuralConstants> {
    let text = std::fs::read_to_string(path)?;
    let field = path.display().to_string();
    let is_json = path.extension().is_some_and(|e| e == "json");
    fn parse<T: serde::de::DeserializeOwned>(text: &str, json: bool) -> Option<T> {
        if json {
            serde_json::from_str(text).ok()
        } else {
            toml::from_str(text).ok()
        }
    }
    if let Some(c) = parse::<StructuralConstants>(&text, is_json) {
        return Ok(c);
    }
    if let Some(r) = parse::<CalibrationReport>(&text, is_json) {
        return Ok(r.to_constants(true, 0.0, 2.0));
    }
    Err(Error::config(
        field,
        "neither structural constants nor a calibration report",
    ))
}
