use nested_mlmc::alm::{norm_cdf, AlmModel, AlmProblem};
use nested_mlmc::nested::{
    estimate, estimate_cdf_and_quantile, level_means, level_stream, sample_inner_mean,
    sample_level_antithetic, sample_level_standard, EstimatorKind, MlmcPlan, NestedProblem,
    PayoffTransform, QuantileStatus,
};
use nested_mlmc::rng::StreamRng;
use nested_mlmc::Result;

/// `X ~ N(0, 1)`, `F(x, U) = x + U`: `E[F | X] = X`, and the mean of `K`
/// inner draws is `N(X, 1/K)` given `X`.
struct Gaussian;

impl NestedProblem for Gaussian {
    type Outer = f64;
    fn sample_outer(&self, rng: &mut StreamRng) -> f64 {
        rng.normal()
    }
    fn sample_inner(&self, x: &f64, rng: &mut StreamRng) -> Result<f64> {
        Ok(x + rng.normal())
    }
    fn exact_conditional(&self, x: &f64) -> Option<f64> {
        Some(*x)
    }
    fn outer_cost_tau(&self) -> f64 {
        2.0
    }
}

fn ml2r_plan() -> MlmcPlan {
    MlmcPlan::new(EstimatorKind::Ml2r, 4000.0, vec![0.6, 0.3, 0.1], 3.0, 1.0).unwrap()
}

#[test]
fn results_do_not_depend_on_the_thread_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let f = PayoffTransform::Indicator(0.5);
                let a = estimate(&Gaussian, &f, &ml2r_plan(), 17).unwrap();
                let b = estimate_cdf_and_quantile(&Gaussian, &ml2r_plan(), 0.5, 0.9, 17).unwrap();
                (
                    a.estimate.to_bits(),
                    b.cdf_at_u.to_bits(),
                    b.quantile.value.to_bits(),
                )
            })
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn single_level_matches_a_direct_loop() {
    let (j, k, seed) = (5000u64, 7u64, 99);
    let f = PayoffTransform::Indicator(0.3);
    let got = estimate(&Gaussian, &f, &MlmcPlan::nested(j, k).unwrap(), seed).unwrap();
    let mut sum = 0.0;
    for i in 0..j {
        let s = level_stream(seed, 1, i);
        let x = Gaussian.sample_outer(&mut s.outer_rng());
        let mut inner = 0.0;
        for n in 0..k as u32 {
            inner += Gaussian.sample_inner(&x, &mut s.inner_rng(n)).unwrap();
        }
        sum += f.apply(inner / k as f64);
    }
    assert_eq!(got.estimate.to_bits(), (sum / j as f64).to_bits());
    assert_eq!(got.consumed_cost, j as f64 * (2.0 + k as f64));
}

#[test]
fn single_level_quantile_is_an_order_statistic() {
    let (j, k, seed, p) = (999u64, 4u64, 5, 0.9);
    let est = estimate_cdf_and_quantile(&Gaussian, &MlmcPlan::nested(j, k).unwrap(), 0.0, p, seed)
        .unwrap();
    let mut means: Vec<f64> = (0..j)
        .map(|i| {
            let s = level_stream(seed, 1, i);
            let x = Gaussian.sample_outer(&mut s.outer_rng());
            sample_inner_mean(&Gaussian, &x, k as u32, &s).unwrap()
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let rank = (p * j as f64).ceil() as usize;
    assert_eq!(est.quantile.value, means[rank - 1]);
    assert_eq!(est.quantile.status, QuantileStatus::Unique);
}

#[test]
fn couplings_share_the_inner_draws() {
    let s = level_stream(3, 2, 11);
    let x = 0.25;
    let f = PayoffTransform::Identity;
    let m = level_means(&Gaussian, &x, 8, &s).unwrap();
    let (fine, coarse) = sample_level_standard(&Gaussian, &x, 8, &f, &s).unwrap();
    let (fine2, c1, c2) = sample_level_antithetic(&Gaussian, &x, 8, &f, &s).unwrap();
    assert_eq!((fine, coarse), (m.fine, m.coarse));
    assert_eq!((fine2, c1, c2), (m.fine, m.coarse, m.coarse_alt));
    assert_eq!(coarse, sample_inner_mean(&Gaussian, &x, 4, &s).unwrap());
    assert!((fine - 0.5 * (c1 + c2)).abs() == 0.0);
}

#[test]
fn cdf_at_threshold_equals_the_indicator_estimate() {
    let plan = ml2r_plan();
    let u = 0.4;
    let a = estimate(&Gaussian, &PayoffTransform::Indicator(u), &plan, 23).unwrap();
    let b = estimate_cdf_and_quantile(&Gaussian, &plan, u, 0.5, 23).unwrap();
    assert!((a.estimate - b.cdf_at_u).abs() <= 1e-12);
    assert!((a.estimate - b.cdf.evaluate(u)).abs() <= 1e-12);
    assert_eq!(a.consumed_cost, b.result.consumed_cost);
}

#[test]
fn identity_payoff_is_unbiased() {
    // Upper levels cancel exactly, so the estimate is the mean of level one.
    let plan = ml2r_plan();
    let r = estimate(&Gaussian, &PayoffTransform::Identity, &plan, 1).unwrap();
    let se = (r.per_level[0].variance() / r.per_level[0].n_outer as f64).sqrt();
    assert!(r.estimate.abs() <= 4.0 * se);
}

#[test]
fn gaussian_indicator_bias_is_reduced_by_ml2r() {
    // E[1{X + Z/sqrt(K) <= u}] = Phi(u / sqrt(1 + 1/K)).
    let u = 1.0;
    let exact = norm_cdf(u);
    let k: f64 = 2.0;
    let nested_mean = norm_cdf(u / (1.0 + 1.0 / k).sqrt());
    let plan = MlmcPlan::new(EstimatorKind::Ml2r, 400_000.0, vec![0.5, 0.3, 0.2], k, 1.0).unwrap();
    let r = estimate(&Gaussian, &PayoffTransform::Indicator(u), &plan, 8).unwrap();
    let var: f64 = r
        .per_level
        .iter()
        .map(|l| l.weight * l.weight * l.variance() / l.n_outer as f64)
        .sum();
    let err = (r.estimate - exact).abs();
    assert!(err <= 4.0 * var.sqrt() + 2e-3, "error {err}");
    assert!(err < (nested_mean - exact).abs());
}

#[test]
fn alm_nested_estimate_is_inside_a_clt_band() {
    let model = AlmModel::reference();
    let u = model.scr_reference(0.005).unwrap();
    let problem = AlmProblem::new(model, 0.0).unwrap();
    let (j, k) = (20_000u64, 64u64);
    let r = estimate(
        &problem,
        &PayoffTransform::Indicator(u),
        &MlmcPlan::nested(j, k).unwrap(),
        4,
    )
    .unwrap();
    let se = (0.995 * 0.005 / j as f64).sqrt();
    // Bias of order |c1| / K with |c1| about 0.03.
    let bias = 0.05 / k as f64;
    assert!(
        (r.estimate - 0.995).abs() <= 4.0 * se + bias,
        "{}",
        r.estimate
    );
}
