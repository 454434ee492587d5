//! Closed-form and numerically optimized estimator parameters.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nested::{EstimatorKind, MlmcPlan};
use crate::weights::MAX_LEVELS;

use super::constants::StructuralConstants;
use super::proxies::{
    approx_total_cost, evaluate_plan, mse_proxy, mu_tilde, objective, optimal_j, optimal_q, v_bar,
    ProxyEvaluation,
};

/// Default rounding unit of the closed-form base inner size.
pub const DEFAULT_K_FLOOR: u64 = 10;

/// Number of consecutive strict increases that ends the integer `K` scan.
pub const K_SCAN_PATIENCE: usize = 16;

/// Hard upper limit of the integer `K` scan.
pub const K_SCAN_CAP: f64 = 1e8;

/// Which parameter rule produced a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanRule {
    ClosedForm,
    Optimized,
}

/// A plan together with the proxies it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanOutcome {
    pub rule: PlanRule,
    pub plan: MlmcPlan,
    pub epsilon: f64,
    pub tau: f64,
    pub proxy: ProxyEvaluation,
    /// `J kappa_tau`.
    pub approx_cost: f64,
    /// `v_bar / J + mu_tilde^2`.
    pub mse_proxy: f64,
    /// Closed-form level count `R(eps)`, the upper end of the level search.
    pub r_upper: usize,
    /// `ceil(log10 R(eps))`, reported for diagnostics.
    pub r_lower: usize,
}

static IDENTITY_CHECKS: AtomicU64 = AtomicU64::new(0);

/// Number of emitted plans whose cost-ratio and MSE-proxy identities were
/// checked in this process.
pub fn identity_checks_performed() -> u64 {
    IDENTITY_CHECKS.load(Ordering::Relaxed)
}

const IDENTITY_TOL: f64 = 1e-12;

/// Checks the cost-ratio identity
/// `C_tau / C_0 = 1 + tau / (ceil(K) sum_r q_r 2^(r-1))` and the MSE proxy
/// (`= eps^2` for optimized plans, `<= eps^2` for closed-form ones).
pub fn check_plan_identities(outcome: &PlanOutcome) -> Result<()> {
    IDENTITY_CHECKS.fetch_add(1, Ordering::Relaxed);
    let p = &outcome.plan;
    let tau = outcome.tau;
    let ratio = approx_total_cost(p, tau) / approx_total_cost(p, 0.0);
    let denom: f64 =
        p.q.iter()
            .enumerate()
            .map(|(r, q)| q * 2f64.powi(r as i32))
            .sum::<f64>()
            * p.k.ceil();
    let expected = 1.0 + tau / denom;
    if ((ratio - expected) / expected).abs() > IDENTITY_TOL {
        return Err(Error::Numerical(format!(
            "cost-ratio identity violated: {ratio} vs {expected}"
        )));
    }
    let eps2 = outcome.epsilon * outcome.epsilon;
    let rel = (outcome.mse_proxy - eps2) / eps2;
    let ok = match outcome.rule {
        PlanRule::Optimized => rel.abs() <= IDENTITY_TOL,
        PlanRule::ClosedForm => rel <= IDENTITY_TOL,
    };
    if !ok {
        return Err(Error::Numerical(format!(
            "MSE proxy {:e} does not match eps^2 = {eps2:e}",
            outcome.mse_proxy
        )));
    }
    if mu_tilde_abs(outcome) >= outcome.epsilon {
        return Err(Error::Numerical(
            "emitted plan violates the bias constraint".into(),
        ));
    }
    Ok(())
}

fn mu_tilde_abs(o: &PlanOutcome) -> f64 {
    o.proxy.mu_tilde.abs()
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "epsilon must be positive, got {eps}"
        )))
    }
}

/// Closed-form level count `R(eps)` for the multi-level kinds.
pub fn closed_form_levels(
    c: &StructuralConstants,
    eps: f64,
    kind: EstimatorKind,
    k_floor: u64,
) -> Result<usize> {
    check_eps(eps)?;
    let a = c.alpha;
    let kf = k_floor as f64;
    let r = match kind {
        EstimatorKind::Ml2r => {
            let h = 0.5 + (c.c_tilde().powf(1.0 / a) / kf).log2();
            let disc = h * h + 2.0 * ((1.0 + 4.0 * a).sqrt() / eps).log2() / a;
            (h + disc.max(0.0).sqrt()).ceil()
        }
        EstimatorKind::StandardMlmc => (1.0
            + (c.c1.abs().powf(1.0 / a) / kf).log2()
            + ((1.0 + 2.0 * a).sqrt() / eps).log2() / a)
            .ceil(),
        EstimatorKind::Nested => 1.0,
    };
    if r > MAX_LEVELS as f64 {
        return Err(Error::Infeasible(format!(
            "closed-form level count {r} exceeds {MAX_LEVELS}"
        )));
    }
    Ok(if r.is_nan() || r < 1.0 { 1 } else { r as usize })
}

#[allow(clippy::too_many_arguments)]
fn finish(
    c: &StructuralConstants,
    rule: PlanRule,
    kind: EstimatorKind,
    j: f64,
    q: Vec<f64>,
    k: f64,
    eps: f64,
    r_upper: usize,
) -> Result<PlanOutcome> {
    let plan = MlmcPlan::new(kind, j, q, k, c.alpha)?;
    let proxy = evaluate_plan(c, &plan, eps)?;
    let outcome = PlanOutcome {
        rule,
        approx_cost: approx_total_cost(&plan, c.tau),
        mse_proxy: mse_proxy(c, &plan)?,
        epsilon: eps,
        tau: c.tau,
        proxy,
        plan,
        r_upper,
        r_lower: (r_upper as f64).log10().ceil() as usize,
    };
    check_plan_identities(&outcome)?;
    Ok(outcome)
}

/// Closed-form parameters for standard MLMC or ML2R.
///
/// `R(eps)`, `K+(eps)`, `K = K_floor ceil(K+/K_floor)`, the `tau = 0`
/// allocation and `J = M_eps v_bar / eps^2` with `M_eps = 1 + 1/(2 alpha R)`
/// (ML2R) or `1 + 1/(2 alpha)` (MLMC).
pub fn plan_table1(
    c: &StructuralConstants,
    eps: f64,
    kind: EstimatorKind,
    k_floor: u64,
) -> Result<PlanOutcome> {
    c.validate()?;
    check_eps(eps)?;
    if k_floor == 0 {
        return Err(Error::invalid("K floor must be at least 1"));
    }
    let a = c.alpha;
    let levels = match kind {
        EstimatorKind::Nested => {
            return Err(Error::invalid(
                "closed-form parameters are defined for the multi-level kinds only",
            ))
        }
        _ => closed_form_levels(c, eps, kind, k_floor)?,
    };
    let r = levels as f64;
    let (k_plus, m_eps) = match kind {
        EstimatorKind::Ml2r => (
            (1.0 + 2.0 * a * r).powf(1.0 / (2.0 * a * r))
                * eps.powf(-1.0 / (a * r))
                * c.c_tilde().powf(1.0 / a)
                * 2f64.powf(-(r - 1.0) / 2.0),
            1.0 + 1.0 / (2.0 * a * r),
        ),
        _ => (
            (1.0 + 2.0 * a).powf(1.0 / (2.0 * a))
                * eps.powf(-1.0 / a)
                * c.c1.abs().powf(1.0 / a)
                * 2f64.powf(-(r - 1.0)),
            1.0 + 1.0 / (2.0 * a),
        ),
    };
    let kf = k_floor as f64;
    let k = (kf * (k_plus / kf).ceil()).max(kf);
    let (q, _) = optimal_q(&c.with_tau(0.0), k, levels, kind)?;
    let j = m_eps * v_bar(c, &q, k, kind)? / (eps * eps);
    finish(c, PlanRule::ClosedForm, kind, j, q, k, eps, levels)
}

/// Smallest integer `K` at which the bias constraint can hold for `levels`
/// levels, bumped until `|mu_tilde| < eps`.
pub fn feasibility_floor(
    c: &StructuralConstants,
    eps: f64,
    levels: usize,
    kind: EstimatorKind,
) -> Result<f64> {
    check_eps(eps)?;
    let a = c.alpha;
    let r = levels as f64;
    let base = match kind {
        EstimatorKind::Ml2r => {
            let c_r = (c.c1.abs() * c.growth_a.powf(r - 1.0)).powf(1.0 / r);
            (c_r.powf(1.0 / a) / (eps.powf(1.0 / (a * r)) * 2f64.powf((r - 1.0) / 2.0))).floor()
                + 1.0
        }
        _ => ((c.c1.abs() / eps).powf(1.0 / a) / 2f64.powf(r - 1.0)).floor() + 1.0,
    };
    let mut k = base.max(1.0);
    while mu_tilde(c, k, levels, kind).abs() >= eps {
        k += 1.0;
        if k > K_SCAN_CAP {
            return Err(Error::Infeasible(format!(
                "no feasible K below {K_SCAN_CAP:e} for R = {levels}"
            )));
        }
    }
    Ok(k)
}

/// Integer `K >= feasibility_floor` minimizing the objective for fixed `R`.
pub fn optimize_k(
    c: &StructuralConstants,
    eps: f64,
    levels: usize,
    kind: EstimatorKind,
) -> Result<(f64, f64)> {
    let mut k = feasibility_floor(c, eps, levels, kind)?;
    let mut best = (k, objective(c, k, levels, kind, eps)?);
    let mut prev = best.1;
    let mut rising = 0;
    while rising < K_SCAN_PATIENCE && k < K_SCAN_CAP {
        k += 1.0;
        let obj = objective(c, k, levels, kind, eps)?;
        if obj < best.1 {
            best = (k, obj);
        }
        if obj > prev {
            rising += 1;
        } else {
            rising = 0;
        }
        prev = obj;
    }
    Ok(best)
}

/// Numerically optimized parameters.
///
/// For each `R` in `1..=R(eps)` the integer `K` minimizing
/// `phi_bar_star / (eps^2 - mu_tilde^2)` is found by scanning upward from the
/// feasibility floor; the best `(K, R)` is kept (ties go to the smaller value)
/// and completed with the optimal allocation and outer size. The nested kind
/// is the single-level case.
pub fn plan_table2(
    c: &StructuralConstants,
    eps: f64,
    kind: EstimatorKind,
    k_floor: u64,
) -> Result<PlanOutcome> {
    c.validate()?;
    check_eps(eps)?;
    let r_upper = closed_form_levels(c, eps, kind, k_floor)?;
    let mut best: Option<(usize, f64, f64)> = None;
    for levels in 1..=r_upper {
        let (k, obj) = optimize_k(c, eps, levels, kind)?;
        if best.is_none_or(|b| obj < b.2) {
            best = Some((levels, k, obj));
        }
    }
    let (levels, k, _) = best.expect("at least one level count is searched");
    let (q, _) = optimal_q(c, k, levels, kind)?;
    let j = optimal_j(c, &q, k, kind, eps)?;
    finish(c, PlanRule::Optimized, kind, j, q, k, eps, r_upper)
}

/// Finds the smallest `eps` in `[1e-8, 1]` whose plan has approximate cost
/// `<= budget`, by bisection on `ln eps` (60 iterations). The returned plan
/// never exceeds the budget.
pub fn invert_budget<F>(budget: f64, mut plan_for: F) -> Result<PlanOutcome>
where
    F: FnMut(f64) -> Result<PlanOutcome>,
{
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::invalid(format!(
            "budget must be positive, got {budget}"
        )));
    }
    let mut hi = 0.0f64;
    let mut lo = (1e-8f64).ln();
    let mut best = plan_for(1.0)?;
    if best.approx_cost > budget {
        return Err(Error::Infeasible(format!(
            "budget {budget:e} is below the cost of the loosest plan ({:e})",
            best.approx_cost
        )));
    }
    let tight = plan_for(lo.exp())?;
    if tight.approx_cost <= budget {
        return Ok(tight);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let o = plan_for(mid.exp())?;
        if o.approx_cost <= budget {
            hi = mid;
            best = o;
        } else {
            lo = mid;
        }
    }
    Ok(best)
}
