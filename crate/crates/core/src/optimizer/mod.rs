//! Estimator parameters from structural constants and a target precision.

mod cardano;
mod constants;
mod proxies;
mod tables;

pub use cardano::{cardano_root, nested_k_cardano, nested_objective, CardanoK};
pub use constants::StructuralConstants;
pub use proxies::{
    approx_total_cost, cost_per_outer, evaluate_plan, gamma_tau, inner_sizes, level_sigmas,
    mse_proxy, mu_tilde, objective, optimal_j, optimal_q, phi_bar, phi_bar_star, v_bar,
    ProxyEvaluation,
};
pub use tables::{
    check_plan_identities, closed_form_levels, feasibility_floor, identity_checks_performed,
    invert_budget, optimize_k, plan_table1, plan_table2, PlanOutcome, PlanRule, DEFAULT_K_FLOOR,
    K_SCAN_CAP, K_SCAN_PATIENCE,
};
