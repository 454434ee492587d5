use nested_mlmc::alm::{compute_z, norm_pdf, AlmModel, AlmProblem, ContractParams, MarketParams};
use nested_mlmc::nested::NestedProblem;
use nested_mlmc::rng::PathStream;
use proptest::prelude::*;

/// Composite Simpson rule for `E[g(Z)]`, `Z ~ N(0, 1)`, on `[-12, 12]`
/// split at a kink of `g`.
fn gauss_expectation(g: impl Fn(f64) -> f64, kink: f64) -> f64 {
    simpson(&g, -12.0, kink) + simpson(&g, kink, 12.0)
}

fn simpson(g: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let n = 20_000;
    let h = (b - a) / n as f64;
    let mut s = 0.0;
    for i in 0..=n {
        let x = a + i as f64 * h;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        s += w * g(x) * norm_pdf(x);
    }
    s * h / 3.0
}

#[test]
fn revaluation_factor_matches_quadrature() {
    let m = MarketParams::default();
    for (r_g, gamma) in [(0.0, 0.85), (0.02, 0.5), (-0.01, 1.0)] {
        let c = ContractParams {
            r_g,
            gamma,
            ..ContractParams::default()
        };
        let drift = m.r - 0.5 * m.sigma * m.sigma;
        let q = gauss_expectation(
            |z| 1.0 + r_g.max(gamma * (drift + m.sigma * z)),
            (r_g / gamma - drift) / m.sigma,
        );
        assert!((compute_z(&m, &c) - q).abs() <= 1e-10, "{r_g} {gamma}");
    }
}

#[test]
fn reference_values() {
    let m = AlmModel::reference();
    assert!((m.z() - 1.069021785108487).abs() <= 1e-12);
    assert!((m.psi0() + 166.2503227346).abs() <= 1e-8);
    assert!((m.x1() - 100.0).abs() <= 1e-12);
    assert!((m.x2() - 97.4852413330).abs() <= 1e-8);
    assert!((m.scr_reference(0.005).unwrap() - 252.76).abs() <= 0.01);
}

#[test]
fn loss_is_non_increasing_in_the_index() {
    let m = AlmModel::reference();
    let mut prev = f64::INFINITY;
    for i in 1..400 {
        let l = m.psi_loss(i as f64).unwrap();
        assert!(l <= prev + 1e-9);
        prev = l;
    }
}

#[test]
fn loss_cdf_inverts_the_quantile() {
    let m = AlmModel::reference();
    for alpha in [0.001, 0.005, 0.05, 0.5] {
        let q = m.scr_reference(alpha).unwrap();
        assert!((m.loss_cdf(q).unwrap() - (1.0 - alpha)).abs() <= 1e-12);
    }
    assert!(m.loss_cdf(1e9).unwrap() == 1.0);
}

#[test]
fn brute_force_quantile_agrees() {
    let m = AlmModel::reference();
    let q = m.scr_reference(0.005).unwrap();
    let problem = AlmProblem::new(m.clone(), 0.0).unwrap();
    let n = 400_000u64;
    let below = (0..n)
        .filter(|&j| {
            let x = problem.sample_outer(&mut PathStream::new(77, 1, j).outer_rng());
            m.psi_loss(x).unwrap() <= q
        })
        .count() as f64
        / n as f64;
    let se = (0.995 * 0.005 / n as f64).sqrt();
    assert!((below - 0.995).abs() <= 4.0 * se, "{below}");
}

fn inner_mean(problem: &AlmProblem, x: f64, n: u32, seed: u64) -> (f64, f64) {
    let s = PathStream::new(seed, 1, 0);
    let mut sum = 0.0;
    let mut sq = 0.0;
    for k in 0..n {
        let v = problem.sample_inner(&x, &mut s.inner_rng(k)).unwrap();
        sum += v;
        sq += v * v;
    }
    let mean = sum / n as f64;
    let var = sq / n as f64 - mean * mean;
    (mean, (var / n as f64).sqrt())
}

#[test]
fn inner_payoff_is_unbiased_for_the_loss() {
    let problem = AlmProblem::new(AlmModel::reference(), 0.0).unwrap();
    for (i, x) in [70.0, 100.0, 130.0].into_iter().enumerate() {
        let (mean, se) = inner_mean(&problem, x, 200_000, i as u64);
        let exact = problem.model().psi_loss(x).unwrap();
        assert!((mean - exact).abs() <= 4.0 * se, "x {x}: {mean} vs {exact}");
    }
}

#[test]
fn two_year_contract_is_unbiased() {
    let c = ContractParams {
        maturity: 2,
        ..ContractParams::default()
    };
    let model = AlmModel::new(MarketParams::default(), c).unwrap();
    let problem = AlmProblem::new(model, 0.0).unwrap();
    for x in [80.0, 115.0] {
        let (mean, se) = inner_mean(&problem, x, 200_000, 9);
        let exact = problem.model().psi_loss(x).unwrap();
        assert!((mean - exact).abs() <= 4.0 * se, "x {x}");
    }
}

#[test]
fn maturity_below_two_is_rejected() {
    let c = ContractParams {
        maturity: 1,
        ..ContractParams::default()
    };
    assert!(AlmModel::new(MarketParams::default(), c).is_err());
}

proptest! {
    #[test]
    fn recursions_match_the_closed_products(
        returns in proptest::collection::vec(-0.5f64..0.5, 1..10)
    ) {
        let m = AlmModel::reference();
        let mut st = m.initial_state();
        for (i, &l) in returns.iter().enumerate() {
            st = m.year_step(i as u32 + 1, st, l);
        }
        let mr = m.reserve_closed_form(&returns);
        let phi = m.shares_closed_form(&returns);
        prop_assert!((st.mr - mr).abs() <= 1e-9 * mr.abs().max(1.0));
        prop_assert!((st.phi - phi).abs() <= 1e-9 * phi.abs().max(1.0));
    }
}
