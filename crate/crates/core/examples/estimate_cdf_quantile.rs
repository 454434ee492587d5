//! One ML2R run on the life-insurance loss: the CDF at the closed-form
//! 99.5% quantile and the quantile itself, from the same samples.
//!
//! `cargo run --release --example estimate_cdf_quantile -- 1e6`

use nested_mlmc::alm::{AlmModel, AlmProblem};
use nested_mlmc::nested::{estimate_cdf_and_quantile, EstimatorKind};
use nested_mlmc::optimizer::{invert_budget, plan_table2, StructuralConstants, DEFAULT_K_FLOOR};

fn main() -> nested_mlmc::Result<()> {
    let budget: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("budget"))
        .unwrap_or(1e6);
    let model = AlmModel::reference();
    let q_ref = model.scr_reference(0.005)?;
    let problem = AlmProblem::new(model, 0.0)?;

    let c = StructuralConstants::alm_reference(0.0);
    let outcome = invert_budget(budget, |e| {
        plan_table2(&c, e, EstimatorKind::Ml2r, DEFAULT_K_FLOOR)
    })?;
    let plan = &outcome.plan;
    println!(
        "plan: J {:.0} K {} R {} eps {:.3e}",
        plan.j, plan.k, plan.levels, outcome.epsilon
    );

    let est = estimate_cdf_and_quantile(&problem, plan, q_ref, 0.995, 42)?;
    println!("P(L <= {q_ref:.3}) ~ {:.5}  (exact 0.995)", est.cdf_at_u);
    println!(
        "q99.5 ~ {:.3}  (exact {q_ref:.3}, {:?})",
        est.quantile.value, est.quantile.status
    );
    println!("cost {:.4e}", est.result.consumed_cost);
    Ok(())
}
