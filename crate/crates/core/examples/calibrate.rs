//! Pilot estimation of the structural constants and the plan they imply.
//!
//! `cargo run --release --example calibrate -- 50000`

use nested_mlmc::alm::{AlmModel, AlmProblem};
use nested_mlmc::calibration::{calibrate, PilotConfig};
use nested_mlmc::nested::{EstimatorKind, PayoffTransform};
use nested_mlmc::optimizer::{plan_table2, DEFAULT_K_FLOOR};

fn main() -> nested_mlmc::Result<()> {
    let n_pilot: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("pilot size"))
        .unwrap_or(50_000);
    let model = AlmModel::reference();
    let u = model.scr_reference(0.005)?;
    let problem = AlmProblem::new(model, 0.0)?;

    let config = PilotConfig {
        k_grid: vec![8, 16, 32, 64],
        n_pilot,
        seed: 7,
        include_c2: false,
    };
    let report = calibrate(&problem, &PayoffTransform::Indicator(u), &config)?;
    for cell in &report.cells {
        println!(
            "K {:>4}: E[Y_K] {:.5}  Var dY^A {:.5}  Var dY^S {:.5}",
            cell.k, cell.base.mean, cell.antithetic.variance, cell.standard.variance
        );
    }
    let c1 = &report.c1.estimate;
    println!("c1   {:.4} [{:.4}, {:.4}]", c1.value, c1.low, c1.high);
    println!("V1^A {:.4}", report.v1_antithetic.value);
    println!("V1^S {:.4}", report.v1_standard.value);

    let constants = report.to_constants(true, 0.0, 2.0);
    let o = plan_table2(&constants, 1e-3, EstimatorKind::Ml2r, DEFAULT_K_FLOOR)?;
    println!(
        "eps 1e-3 -> J {:.0} K {} R {}",
        o.plan.j, o.plan.k, o.plan.levels
    );
    Ok(())
}
