//! Cost model and the bias / variance proxies used by the optimizers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nested::{EstimatorKind, MlmcPlan};
use crate::weights;

use super::constants::StructuralConstants;

/// Cost of one outer sample with `k` inner samples: `tau + k`.
pub fn gamma_tau(tau: f64, k: f64) -> f64 {
    tau + k
}

/// `K_r = ceil(K) 2^(r-1)` as reals, `r = 1..levels`.
pub fn inner_sizes(k: f64, levels: usize) -> Vec<f64> {
    let k0 = k.ceil();
    (0..levels).map(|r| k0 * 2f64.powi(r as i32)).collect()
}

/// `kappa_tau = sum_r q_r (tau + K_r)`.
pub fn cost_per_outer(q: &[f64], k: f64, tau: f64) -> f64 {
    q.iter()
        .zip(inner_sizes(k, q.len()))
        .map(|(q, kr)| q * gamma_tau(tau, kr))
        .sum()
}

/// `J kappa_tau`.
pub fn approx_total_cost(plan: &MlmcPlan, tau: f64) -> f64 {
    plan.j * cost_per_outer(&plan.q, plan.k, tau)
}

fn level_weights_for(kind: EstimatorKind, alpha: f64, levels: usize) -> Result<Vec<f64>> {
    match kind {
        EstimatorKind::Ml2r => weights::level_weights(alpha, levels, true),
        EstimatorKind::StandardMlmc => weights::level_weights(alpha, levels, false),
        EstimatorKind::Nested if levels == 1 => Ok(vec![1.0]),
        EstimatorKind::Nested => Err(Error::invalid("nested estimator has a single level")),
    }
}

/// Tractable bias of a plan with base size `k` and `levels` levels.
///
/// Weighted: `(-1)^(R-1) c_R / (ceil(K)^(alpha R) 2^(alpha R (R-1)/2))` with
/// `c_R = c_1 a^(R-1)`; standard and nested:
/// `c_1 / (ceil(K)^alpha 2^((R-1) alpha))`.
pub fn mu_tilde(c: &StructuralConstants, k: f64, levels: usize, kind: EstimatorKind) -> f64 {
    let k0 = k.ceil();
    let r = levels as f64;
    match kind {
        EstimatorKind::Ml2r => {
            let sign = if levels % 2 == 1 { 1.0 } else { -1.0 };
            sign * c.c_r(levels) / (k0.powf(c.alpha * r) * 2f64.powf(c.alpha * r * (r - 1.0) / 2.0))
        }
        EstimatorKind::StandardMlmc | EstimatorKind::Nested => {
            c.c1 / (k0.powf(c.alpha) * 2f64.powf((r - 1.0) * c.alpha))
        }
    }
}

/// Level standard deviation bounds `sigma_bar(r, K)`: `sqrt(sigma1_sq)` at
/// level 1 and `|A_r| sqrt(V_1) / K_r^(beta/2)` above.
pub fn level_sigmas(
    c: &StructuralConstants,
    k: f64,
    levels: usize,
    kind: EstimatorKind,
) -> Result<Vec<f64>> {
    let a = level_weights_for(kind, c.alpha, levels)?;
    let ks = inner_sizes(k, levels);
    Ok((0..levels)
        .map(|r| {
            if r == 0 {
                c.sigma1_sq.sqrt()
            } else {
                a[r].abs() * c.v1.sqrt() / ks[r].powf(c.beta / 2.0)
            }
        })
        .collect())
}

/// Allocation minimizing the effort `v_bar * kappa_tau`:
/// `q_r = sigma_bar(r) / (sqrt(tau + K_r) mu)` with
/// `mu = sum_r sigma_bar(r) / sqrt(tau + K_r)`.
pub fn optimal_q(
    c: &StructuralConstants,
    k: f64,
    levels: usize,
    kind: EstimatorKind,
) -> Result<(Vec<f64>, f64)> {
    let sig = level_sigmas(c, k, levels, kind)?;
    let ks = inner_sizes(k, levels);
    let raw: Vec<f64> = sig
        .iter()
        .zip(&ks)
        .map(|(s, kr)| s / gamma_tau(c.tau, *kr).sqrt())
        .collect();
    let mu: f64 = raw.iter().sum();
    Ok((raw.iter().map(|x| x / mu).collect(), mu))
}

/// Unit variance bound `v_bar = sum_r sigma_bar(r)^2 / q_r`.
pub fn v_bar(c: &StructuralConstants, q: &[f64], k: f64, kind: EstimatorKind) -> Result<f64> {
    let sig = level_sigmas(c, k, q.len(), kind)?;
    Ok(sig.iter().zip(q).map(|(s, q)| s * s / q).sum())
}

/// Effort `v_bar(q) * kappa_tau(q)`.
pub fn phi_bar(c: &StructuralConstants, q: &[f64], k: f64, kind: EstimatorKind) -> Result<f64> {
    Ok(v_bar(c, q, k, kind)? * cost_per_outer(q, k, c.tau))
}

/// Minimal effort over allocations: `(sum_r sigma_bar(r) sqrt(tau + K_r))^2`.
pub fn phi_bar_star(
    c: &StructuralConstants,
    k: f64,
    levels: usize,
    kind: EstimatorKind,
) -> Result<f64> {
    let sig = level_sigmas(c, k, levels, kind)?;
    let s: f64 = sig
        .iter()
        .zip(inner_sizes(k, levels))
        .map(|(s, kr)| s * gamma_tau(c.tau, kr).sqrt())
        .sum();
    Ok(s * s)
}

/// `J = v_bar / (eps^2 - mu_tilde^2)`, the size at which the MSE proxy equals
/// `eps^2`.
pub fn optimal_j(
    c: &StructuralConstants,
    q: &[f64],
    k: f64,
    kind: EstimatorKind,
    eps: f64,
) -> Result<f64> {
    let mu = mu_tilde(c, k, q.len(), kind);
    if mu.abs() >= eps {
        return Err(Error::Infeasible(format!(
            "bias proxy |mu_tilde| = {:e} is not below epsilon = {eps:e} (K = {k}, R = {})",
            mu.abs(),
            q.len()
        )));
    }
    Ok(v_bar(c, q, k, kind)? / (eps * eps - mu * mu))
}

/// `v_bar / J + mu_tilde^2`.
pub fn mse_proxy(c: &StructuralConstants, plan: &MlmcPlan) -> Result<f64> {
    let mu = mu_tilde(c, plan.k, plan.levels, plan.kind);
    Ok(v_bar(c, &plan.q, plan.k, plan.kind)? / plan.j + mu * mu)
}

/// Proxy quantities of a plan at precision `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyEvaluation {
    pub mu_tilde: f64,
    pub v_bar: f64,
    pub kappa_tau: f64,
    /// Effort of the plan's own allocation.
    pub phi_bar: f64,
    pub phi_bar_star: f64,
    /// `phi_bar_star / (eps^2 - mu_tilde^2)`; infinite when infeasible.
    pub objective: f64,
}

/// Objective minimized over `(K, R)`.
pub fn objective(
    c: &StructuralConstants,
    k: f64,
    levels: usize,
    kind: EstimatorKind,
    eps: f64,
) -> Result<f64> {
    let mu = mu_tilde(c, k, levels, kind);
    if mu.abs() >= eps {
        return Ok(f64::INFINITY);
    }
    Ok(phi_bar_star(c, k, levels, kind)? / (eps * eps - mu * mu))
}

pub fn evaluate_plan(
    c: &StructuralConstants,
    plan: &MlmcPlan,
    eps: f64,
) -> Result<ProxyEvaluation> {
    let mu = mu_tilde(c, plan.k, plan.levels, plan.kind);
    let vb = v_bar(c, &plan.q, plan.k, plan.kind)?;
    let kappa = cost_per_outer(&plan.q, plan.k, c.tau);
    let star = phi_bar_star(c, plan.k, plan.levels, plan.kind)?;
    Ok(ProxyEvaluation {
        mu_tilde: mu,
        v_bar: vb,
        kappa_tau: kappa,
        phi_bar: vb * kappa,
        phi_bar_star: star,
        objective: if mu.abs() < eps {
            star / (eps * eps - mu * mu)
        } else {
            f64::INFINITY
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn consts() -> StructuralConstants {
        StructuralConstants::alm_reference(0.0)
    }

    #[test]
    fn unit_costs() {
        assert_eq!(gamma_tau(0.0, 64.0), 64.0);
        assert_eq!(gamma_tau(10.0, 64.0), 74.0);
        assert_eq!(gamma_tau(25.0, 38.0), 63.0);
        assert_eq!(cost_per_outer(&[1.0], 10.0, 0.0), 10.0);
        assert_eq!(cost_per_outer(&[0.5, 0.5], 10.0, 0.0), 15.0);
    }

    #[test]
    fn cost_ratio_example() {
        let plan = MlmcPlan::new(
            EstimatorKind::StandardMlmc,
            100.0,
            vec![0.5, 0.5],
            10.0,
            1.0,
        )
        .unwrap();
        let r = approx_total_cost(&plan, 10.0) / approx_total_cost(&plan, 0.0);
        assert_relative_eq!(r, 5.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn bias_proxies() {
        let c = consts();
        assert_relative_eq!(
            mu_tilde(&c, 10.0, 1, EstimatorKind::StandardMlmc),
            0.0025,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            mu_tilde(&c, 10.0, 2, EstimatorKind::Ml2r),
            -2.5e-4,
            max_relative = 1e-15
        );
        assert_eq!(
            mu_tilde(&c, 9.1, 3, EstimatorKind::Ml2r),
            mu_tilde(&c, 10.0, 3, EstimatorKind::Ml2r)
        );
    }

    #[test]
    fn j_examples() {
        // v_bar = 1 with a single level and sigma1_sq = 1; mu_tilde ~ 0.
        let c = StructuralConstants {
            sigma1_sq: 1.0,
            c1: 1e-300,
            ..consts()
        };
        let j = optimal_j(&c, &[1.0], 10.0, EstimatorKind::Nested, 0.01).unwrap();
        assert_relative_eq!(j, 1e4, max_relative = 1e-12);

        let eps = 0.01;
        let c2 = StructuralConstants {
            sigma1_sq: 1.0,
            c1: 10.0 * eps / 2f64.sqrt(),
            ..consts()
        };
        let j2 = optimal_j(&c2, &[1.0], 10.0, EstimatorKind::Nested, eps).unwrap();
        assert_relative_eq!(j2, 2.0 * j, max_relative = 1e-12);

        let c3 = StructuralConstants {
            c1: 1.0,
            ..consts()
        };
        assert!(matches!(
            optimal_j(&c3, &[1.0], 10.0, EstimatorKind::Nested, 0.01),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn large_tau_allocation_tracks_sigmas() {
        let c = consts().with_tau(1e8);
        let (q, _) = optimal_q(&c, 10.0, 4, EstimatorKind::Ml2r).unwrap();
        let sig = level_sigmas(&c, 10.0, 4, EstimatorKind::Ml2r).unwrap();
        let s: f64 = sig.iter().sum();
        for (q, s_r) in q.iter().zip(&sig) {
            assert!((q - s_r / s).abs() < 1e-3);
        }
    }
}
