//! Closed-form and optimized estimator parameters at a fixed budget over a
//! grid of outer-to-inner cost ratios.

use nested_mlmc::nested::EstimatorKind;
use nested_mlmc::optimizer::{
    invert_budget, plan_table1, plan_table2, StructuralConstants, DEFAULT_K_FLOOR,
};

fn main() -> nested_mlmc::Result<()> {
    let budget = 5e8;
    println!(
        "{:>5} {:>12} {:>12} {:>5} {:>3} {:>12}",
        "tau", "rule", "J", "K", "R", "epsilon"
    );
    for tau in [0.0, 25.0, 50.0, 75.0, 100.0] {
        let c = StructuralConstants::alm_reference(tau);
        let closed = invert_budget(budget, |e| {
            plan_table1(&c, e, EstimatorKind::Ml2r, DEFAULT_K_FLOOR)
        })?;
        let opt = invert_budget(budget, |e| {
            plan_table2(&c, e, EstimatorKind::Ml2r, DEFAULT_K_FLOOR)
        })?;
        for (name, o) in [("closed form", &closed), ("optimized", &opt)] {
            println!(
                "{tau:>5} {name:>12} {:>12.4e} {:>5} {:>3} {:>12.4e}",
                o.plan.j, o.plan.k, o.plan.levels, o.epsilon
            );
        }
    }

    // A plan at a precision, with its allocation.
    let c = StructuralConstants::alm_reference(0.0);
    let o = plan_table2(&c, 1e-4, EstimatorKind::Ml2r, DEFAULT_K_FLOOR)?;
    println!("\neps = 1e-4: q = {:?}", o.plan.q);
    println!("level weights = {:?}", o.plan.level_weights);
    println!("approx cost = {:.4e}", o.approx_cost);
    Ok(())
}
