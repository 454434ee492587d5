//! Variance gained by the antithetic level construction on the loss
//! indicator, against half the conditional variance of `Y_N`.
//!
//! `cargo run --release --example antithetic_variance -- 20000`

use nested_mlmc::alm::{AlmModel, AlmProblem};
use nested_mlmc::nested::{antithetic_gain, PayoffTransform};

fn main() -> nested_mlmc::Result<()> {
    let n_outer: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("outer draws"))
        .unwrap_or(20_000);
    let model = AlmModel::reference();
    let u = model.scr_reference(0.005)?;
    let problem = AlmProblem::new(model, 0.0)?;
    let f = PayoffTransform::Indicator(u);

    let g = antithetic_gain(&problem, &f, 8, n_outer, 64, 1)?;
    println!("Var standard   {:.5}", g.var_standard);
    println!("Var antithetic {:.5}", g.var_antithetic);
    println!("difference     {:.5} +- {:.5}", g.d, g.se_d);
    println!("E[Var|X] / 2   {:.5} +- {:.5}", g.h, g.se_h);
    println!("consistent at 3 SE: {}", g.consistent(3.0));
    Ok(())
}
