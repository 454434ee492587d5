//! Closed-form inner sample size of the plain nested estimator against a
//! brute-force integer search.

use nested_mlmc::optimizer::{nested_k_cardano, nested_objective, StructuralConstants};

fn main() -> nested_mlmc::Result<()> {
    for tau in [0.0, 10.0, 100.0] {
        let c = StructuralConstants::alm_reference(tau);
        for eps in [1e-2, 1e-3, 1e-4] {
            let k = nested_k_cardano(&c, eps)?;
            let best = (1..=(10.0 * k.k_real) as u64 + 10)
                .min_by(|&a, &b| {
                    nested_objective(&c, eps, a as f64)
                        .total_cmp(&nested_objective(&c, eps, b as f64))
                })
                .unwrap();
            println!(
                "tau {tau:>5} eps {eps:.0e}: K real {:>10.3}  K int {:>6}  scan {:>6}",
                k.k_real, k.k_int, best
            );
        }
    }
    Ok(())
}
