//! Plugging a user-defined nested problem into the estimators.
//!
//! `X ~ N(0, 1)`, `F(x, U) = x + U` with `U ~ N(0, 1)`; the target
//! `P(E[F | X] <= 1) = Phi(1)` is known exactly.

use nested_mlmc::alm::norm_cdf;
use nested_mlmc::nested::{estimate, EstimatorKind, MlmcPlan, NestedProblem, PayoffTransform};
use nested_mlmc::rng::StreamRng;

struct Gaussian;

impl NestedProblem for Gaussian {
    type Outer = f64;

    fn sample_outer(&self, rng: &mut StreamRng) -> f64 {
        rng.normal()
    }

    fn sample_inner(&self, x: &f64, rng: &mut StreamRng) -> nested_mlmc::Result<f64> {
        Ok(x + rng.normal())
    }

    fn exact_conditional(&self, x: &f64) -> Option<f64> {
        Some(*x)
    }

    fn outer_cost_tau(&self) -> f64 {
        1.0
    }
}

fn main() -> nested_mlmc::Result<()> {
    let f = PayoffTransform::Indicator(1.0);
    let exact = norm_cdf(1.0);
    let nested = MlmcPlan::nested(200_000, 16)?;
    let ml2r = MlmcPlan::new(
        EstimatorKind::Ml2r,
        250_000.0,
        vec![0.7, 0.2, 0.1],
        4.0,
        1.0,
    )?;
    for plan in [&nested, &ml2r] {
        let r = estimate(&Gaussian, &f, plan, 5)?;
        println!(
            "{:<13} estimate {:.5} error {:+.5} cost {:.3e}",
            plan.kind.as_str(),
            r.estimate,
            r.estimate - exact,
            r.consumed_cost
        );
    }
    Ok(())
}
