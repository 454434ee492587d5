//! The RMSE-versus-cost benchmark and the tau sweep.

use serde::{Deserialize, Serialize};

use crate::alm::{AlmModel, AlmProblem};
use crate::error::{Error, Result};
use crate::nested::{estimate_cdf_and_quantile, EstimatorKind, NestedProblem, QuantileStatus};
use crate::optimizer::{invert_budget, PlanOutcome, PlanRule};
use crate::rng::{mix_seed, replication_seed};

use super::config::{EstimatorKindName, ExperimentConfig};
use super::estimators::{plan_for_rule, EstimatorId};
use super::records::{join, BenchmarkRecord, TauSweepRecord};
use super::stats::{error_summary, mse_ratio_interval, spearman, ErrorSummary, Spearman};

/// Largest tolerated relative gap between realized and planned cost.
pub const COST_TOLERANCE: f64 = 0.05;

/// Confidence level of the efficiency interval.
pub const EFFICIENCY_CONFIDENCE: f64 = 0.90;

/// Base seed of one experiment cell.
pub fn cell_seed(seed: u64, group: u64, grid_index: u64) -> u64 {
    mix_seed(seed ^ mix_seed((group << 32) | grid_index))
}

/// Threshold and exact values the errors are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct References {
    pub threshold: f64,
    pub cdf: f64,
    pub quantile_level: f64,
    pub quantile: f64,
}

impl References {
    /// Closed-form references unless the config supplies them. Without a
    /// monotone loss and without supplied values the RMSE is undefined and
    /// this fails.
    pub fn resolve(cfg: &ExperimentConfig, model: &AlmModel) -> Result<Self> {
        let t = &cfg.targets;
        let p = t.quantile_level;
        let unavailable = |what: &str, e: Error| {
            Error::config(
                format!("targets.{what}"),
                format!("no closed-form reference available ({e}); supply it in the config"),
            )
        };
        let quantile = match t.reference_quantile {
            Some(q) => q,
            None => model
                .scr_reference(1.0 - p)
                .map_err(|e| unavailable("reference_quantile", e))?,
        };
        let threshold = t.threshold.unwrap_or(quantile);
        let cdf = match (t.reference_cdf, t.threshold) {
            (Some(c), _) => c,
            (None, None) if t.reference_quantile.is_none() => p,
            (None, _) => model
                .loss_cdf(threshold)
                .map_err(|e| unavailable("reference_cdf", e))?,
        };
        Ok(Self {
            threshold,
            cdf,
            quantile_level: p,
            quantile,
        })
    }
}

/// Errors of `M` replications of one plan.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cdf_values: Vec<f64>,
    pub quantile_values: Vec<f64>,
    pub cdf: ErrorSummary,
    pub quantile: ErrorSummary,
    pub realized_cost: f64,
    pub quantile_flagged: usize,
}

/// Runs `m` replications of a plan; replication `i` uses seed
/// `base_seed ^ i`. Both targets come from the same samples.
pub fn run_replications<P: NestedProblem>(
    problem: &P,
    outcome: &PlanOutcome,
    refs: &References,
    m: usize,
    base_seed: u64,
) -> Result<CellResult> {
    let tau = problem.outer_cost_tau();
    let realized_cost = outcome.plan.realized_cost(tau)?;
    let gap = (realized_cost - outcome.approx_cost) / outcome.approx_cost;
    if gap.abs() > COST_TOLERANCE {
        return Err(Error::Numerical(format!(
            "realized cost {realized_cost:e} is {:.1}% away from the planned {:e}",
            100.0 * gap,
            outcome.approx_cost
        )));
    }
    let mut cdf_values = Vec::with_capacity(m);
    let mut quantile_values = Vec::with_capacity(m);
    let mut flagged = 0;
    for i in 0..m {
        let seed = replication_seed(base_seed, i as u64);
        let est = estimate_cdf_and_quantile(
            problem,
            &outcome.plan,
            refs.threshold,
            refs.quantile_level,
            seed,
        )?;
        cdf_values.push(est.cdf_at_u);
        quantile_values.push(est.quantile.value);
        if est.quantile.status != QuantileStatus::Unique {
            flagged += 1;
        }
    }
    Ok(CellResult {
        cdf: error_summary(&cdf_values, refs.cdf, 0.95)?,
        quantile: error_summary(&quantile_values, refs.quantile, 0.95)?,
        cdf_values,
        quantile_values,
        realized_cost,
        quantile_flagged: flagged,
    })
}

/// A point of the benchmark grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridPoint {
    Budget(f64),
    Epsilon(f64),
}

impl ExperimentConfig {
    pub fn benchmark_grid(&self) -> Vec<GridPoint> {
        match (&self.benchmark.budgets, &self.benchmark.epsilons) {
            (_, Some(e)) => e.iter().map(|&v| GridPoint::Epsilon(v)).collect(),
            (Some(b), None) => b.iter().map(|&v| GridPoint::Budget(v)).collect(),
            (None, None) => Vec::new(),
        }
    }
}

fn record(
    est: EstimatorId,
    grid_index: usize,
    point: GridPoint,
    outcome: &PlanOutcome,
    refs: &References,
    seed: u64,
    cell: &CellResult,
) -> Result<BenchmarkRecord> {
    let p = &outcome.plan;
    Ok(BenchmarkRecord {
        estimator: est,
        kind: p.kind,
        rule: outcome.rule,
        grid_index,
        budget: match point {
            GridPoint::Budget(b) => Some(b),
            GridPoint::Epsilon(_) => None,
        },
        epsilon: outcome.epsilon,
        tau: outcome.tau,
        j: p.j,
        k: p.k,
        levels: p.levels,
        q: join(&p.q),
        outer_counts: join(p.outer_counts()?),
        planned_cost: outcome.approx_cost,
        realized_cost: cell.realized_cost,
        mse_proxy: outcome.mse_proxy,
        replications: cell.cdf.replications,
        seed,
        cdf_threshold: refs.threshold,
        cdf_reference: refs.cdf,
        cdf_mean: cell.cdf.mean,
        cdf_bias: cell.cdf.bias,
        cdf_rmse: cell.cdf.rmse,
        cdf_rmse_low: cell.cdf.rmse_low,
        cdf_rmse_high: cell.cdf.rmse_high,
        quantile_level: refs.quantile_level,
        quantile_reference: refs.quantile,
        quantile_mean: cell.quantile.mean,
        quantile_bias: cell.quantile.bias,
        quantile_rmse: cell.quantile.rmse,
        quantile_rmse_low: cell.quantile.rmse_low,
        quantile_rmse_high: cell.quantile.rmse_high,
        quantile_flagged: cell.quantile_flagged,
    })
}

/// Benchmark of every configured estimator over the budget or precision
/// grid. Records are ordered by (estimator, grid point); `progress` sees each
/// record as it is completed.
pub fn run_benchmark(
    cfg: &ExperimentConfig,
    progress: &mut dyn FnMut(&BenchmarkRecord),
) -> Result<Vec<BenchmarkRecord>> {
    cfg.validate()?;
    let tau = cfg.problem.tau;
    let model = cfg.model()?;
    let refs = References::resolve(cfg, &model)?;
    let problem = AlmProblem::new(model, tau)?;
    let constants = cfg.structural_constants(tau)?;
    let b = &cfg.benchmark;
    let mut out = Vec::new();
    for est in &b.estimators {
        for (g, point) in cfg.benchmark_grid().into_iter().enumerate() {
            let outcome = match point {
                GridPoint::Budget(v) => est.plan_for_budget(&constants, v, b.k_floor)?,
                GridPoint::Epsilon(e) => est.plan(&constants, e, b.k_floor)?,
            };
            let seed = cell_seed(cfg.seed, est.index(), g as u64);
            let cell = run_replications(&problem, &outcome, &refs, b.replications, seed)?;
            let rec = record(*est, g, point, &outcome, &refs, seed, &cell)?;
            progress(&rec);
            out.push(rec);
        }
    }
    Ok(out)
}

/// Records of the tau sweep and the rank trend of the efficiency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauSweepOutput {
    pub records: Vec<TauSweepRecord>,
    /// Spearman correlation of efficiency against tau over the feasible
    /// points, when at least three exist.
    pub trend: Option<Spearman>,
}

/// For each tau, inverts the budget under both parameter rules, runs the
/// replications and reports `e_tau = MSE(closed form) / MSE(optimized)`.
pub fn run_tau_sweep(
    cfg: &ExperimentConfig,
    progress: &mut dyn FnMut(&TauSweepRecord),
) -> Result<TauSweepOutput> {
    cfg.validate()?;
    let t = &cfg.tau_sweep;
    let model = cfg.model()?;
    let refs = References::resolve(cfg, &model)?;
    let kind = match t.kind {
        EstimatorKindName::Ml2r => EstimatorKind::Ml2r,
        EstimatorKindName::Mlmc => EstimatorKind::StandardMlmc,
    };
    let rules = [PlanRule::ClosedForm, PlanRule::Optimized];
    let mut records = Vec::new();
    let mut trend_points = Vec::new();
    for (ti, &tau) in t.taus.iter().enumerate() {
        let problem = AlmProblem::new(model.clone(), tau)?;
        let constants = cfg.structural_constants(tau)?;
        let mut rows = Vec::new();
        let mut summaries = Vec::new();
        for (ri, rule) in rules.iter().enumerate() {
            let seed = cell_seed(cfg.seed, 100 + ri as u64, ti as u64);
            let mut row = TauSweepRecord {
                tau,
                budget: t.budget,
                kind,
                rule: *rule,
                status: "ok".into(),
                replications: t.replications,
                seed,
                ..TauSweepRecord::default()
            };
            match invert_budget(t.budget, |e| {
                plan_for_rule(*rule, kind, &constants, e, t.k_floor)
            }) {
                Ok(o) => {
                    let cell = run_replications(&problem, &o, &refs, t.replications, seed)?;
                    row.epsilon = Some(o.epsilon);
                    row.j = Some(o.plan.j);
                    row.k = Some(o.plan.k);
                    row.levels = Some(o.plan.levels);
                    row.planned_cost = Some(o.approx_cost);
                    row.realized_cost = Some(cell.realized_cost);
                    row.cdf_mse = Some(cell.cdf.mse);
                    row.cdf_rmse_low = Some(cell.cdf.rmse_low);
                    row.cdf_rmse_high = Some(cell.cdf.rmse_high);
                    summaries.push(Some(cell.cdf));
                }
                Err(Error::Infeasible(msg)) => {
                    row.status = format!("infeasible: {msg}");
                    summaries.push(None);
                }
                Err(e) => return Err(e),
            }
            rows.push(row);
        }
        if let (Some(closed), Some(opt)) = (summaries[0], summaries[1]) {
            let e = mse_ratio_interval(&closed, &opt, EFFICIENCY_CONFIDENCE)?;
            for row in &mut rows {
                row.efficiency = Some(e.value);
                row.efficiency_low = Some(e.low);
                row.efficiency_high = Some(e.high);
            }
            trend_points.push((tau, e.value));
        }
        for row in rows {
            progress(&row);
            records.push(row);
        }
    }
    let trend = if trend_points.len() >= 3 {
        let (x, y): (Vec<f64>, Vec<f64>) = trend_points.into_iter().unzip();
        Some(spearman(&x, &y)?)
    } else {
        None
    };
    Ok(TauSweepOutput { records, trend })
}
