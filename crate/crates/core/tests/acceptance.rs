//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Name filters given on the command line select a subset, e.g.
//! `cargo test --test acceptance -- cardano weights`.

use std::process::ExitCode;
use std::time::Instant;

use nested_mlmc::alm::{AlmModel, AlmProblem};
use nested_mlmc::bench::stats::compare_mse;
use nested_mlmc::bench::{run_benchmark, BenchmarkRecord, EstimatorId, ExperimentConfig};
use nested_mlmc::calibration::{calibrate, PilotConfig};
use nested_mlmc::cli;
use nested_mlmc::nested::{antithetic_gain, EstimatorKind, PayoffTransform};
use nested_mlmc::optimizer::{
    cardano_root, identity_checks_performed, invert_budget, nested_k_cardano, nested_objective,
    plan_table1, plan_table2, StructuralConstants, DEFAULT_K_FLOOR,
};
use nested_mlmc::weights::compute_weights;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const SEED: u64 = 2024;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn closed_form_quantile() -> Outcome {
    let mut out = Vec::new();
    let code = cli::run(["nested-mlmc", "alm-reference"], &mut out);
    let text = String::from_utf8_lossy(&out);
    let q: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("q99.5 = "))
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| format!("no quantile line (exit {code})"))?;
    check(
        code == 0 && (q - 252.76).abs() <= 0.01,
        format!(
            "q99.5 = {q:.6}, |q - 252.76| = {:.4} <= 0.01",
            (q - 252.76).abs()
        ),
    )
}

fn parameter_tables() -> Outcome {
    let taus = [0.0, 25.0, 50.0, 75.0, 100.0];
    let t1_j = [1.37e7, 8.98e6, 6.19e6, 4.73e6, 3.82e6];
    let t2 = [
        (2.23e7, 10.0, 3),
        (6.30e6, 38.0, 2),
        (4.71e6, 39.0, 2),
        (3.72e6, 41.0, 2),
        (3.08e6, 43.0, 2),
    ];
    let mut ok = true;
    let mut rows = Vec::new();
    for (i, tau) in taus.into_iter().enumerate() {
        let c = StructuralConstants::alm_reference(tau);
        let a = invert_budget(5e8, |e| {
            plan_table1(&c, e, EstimatorKind::Ml2r, DEFAULT_K_FLOOR)
        })
        .map_err(|e| e.to_string())?;
        let b = invert_budget(5e8, |e| {
            plan_table2(&c, e, EstimatorKind::Ml2r, DEFAULT_K_FLOOR)
        })
        .map_err(|e| e.to_string())?;
        let d1 = a.plan.j / t1_j[i] - 1.0;
        let d2 = b.plan.j / t2[i].0 - 1.0;
        ok &= a.plan.k == 10.0 && a.plan.levels == 4 && d1.abs() <= 0.02;
        ok &= (b.plan.k - t2[i].1).abs() <= 1.0 && b.plan.levels == t2[i].2 && d2.abs() <= 0.02;
        rows.push(format!(
            "tau {tau}: T1 (K {}, R {}, J {:+.1}%) T2 (K {}, R {}, J {:+.1}%)",
            a.plan.k,
            a.plan.levels,
            100.0 * d1,
            b.plan.k,
            b.plan.levels,
            100.0 * d2
        ));
    }
    check(ok, rows.join("; "))
}

fn variance_identity() -> Outcome {
    let model = AlmModel::reference();
    let u = model.scr_reference(0.005).map_err(|e| e.to_string())?;
    let problem = AlmProblem::new(model, 0.0).map_err(|e| e.to_string())?;
    let g = antithetic_gain(
        &problem,
        &PayoffTransform::Indicator(u),
        8,
        100_000,
        64,
        SEED,
    )
    .map_err(|e| e.to_string())?;
    check(
        g.consistent(3.0) && g.positive(3.0),
        format!(
            "D = {:.5} (SE {:.5}), H = {:.5} (SE {:.5}), |D - H| = {:.5} <= {:.5}, D / SE_D = {:.1}",
            g.d,
            g.se_d,
            g.h,
            g.se_h,
            (g.d - g.h).abs(),
            3.0 * (g.se_d + g.se_h),
            g.d / g.se_d
        ),
    )
}

fn dominance() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for kind in [EstimatorKind::Ml2r, EstimatorKind::StandardMlmc] {
        for tau in [0.0, 25.0, 100.0] {
            let c = StructuralConstants::alm_reference(tau);
            for i in 0..6 {
                let eps = 10f64.powf(-2.0 - 0.5 * i as f64);
                let a = plan_table1(&c, eps, kind, DEFAULT_K_FLOOR).map_err(|e| e.to_string())?;
                let b = plan_table2(&c, eps, kind, DEFAULT_K_FLOOR).map_err(|e| e.to_string())?;
                worst = worst.max(b.approx_cost / a.approx_cost);
                n += 1;
            }
        }
    }
    check(
        worst <= 1.0,
        format!("{n} grid points, max cost(T2) / cost(T1) = {worst:.4}"),
    )
}

fn cardano() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut max_res: f64 = 0.0;
    let mut mismatches = 0;
    for _ in 0..200 {
        let c1: f64 = rng.random_range(1e-3..1.0);
        let eps = 10f64.powf(rng.random_range(-4.0..-1.0));
        let tau: f64 = rng.random_range(0.0..200.0);
        let k = cardano_root(c1, eps, tau);
        let (a, b, d) = (
            eps * eps * k.powi(3),
            3.0 * c1 * c1 * k,
            2.0 * tau * c1 * c1,
        );
        max_res = max_res.max((a - b - d).abs() / (a + b + d));
        let c = StructuralConstants {
            c1,
            ..StructuralConstants::alm_reference(tau)
        };
        let snapped = nested_k_cardano(&c, eps).map_err(|e| e.to_string())?;
        let hi = (3.0 * k).ceil() as u64 + 10;
        let scan = (1..=hi)
            .min_by(|&x, &y| {
                nested_objective(&c, eps, x as f64).total_cmp(&nested_objective(&c, eps, y as f64))
            })
            .unwrap_or(1);
        if nested_objective(&c, eps, snapped.k_int as f64) > nested_objective(&c, eps, scan as f64)
        {
            mismatches += 1;
        }
    }
    let mut zero_tau: f64 = 0.0;
    for (c1, eps) in [(0.025, 1e-3), (0.3, 1e-2), (2.0, 1e-5)] {
        let k = cardano_root(c1, eps, 0.0);
        zero_tau = zero_tau.max((k / (3f64.sqrt() * c1 / eps) - 1.0).abs());
    }
    check(
        max_res <= 1e-9 && mismatches == 0 && zero_tau <= 1e-12,
        format!(
            "max cubic residual {max_res:.1e}, integer mismatches {mismatches}/200, tau = 0 rel err {zero_tau:.1e}"
        ),
    )
}

fn weights() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut w1: f64 = 0.0;
    for alpha in [0.5, 1.0, 2.0] {
        for r in 1..=15 {
            let t = compute_weights(alpha, r).map_err(|e| e.to_string())?;
            for k in 0..r {
                let s: f64 =
                    t.w.iter()
                        .enumerate()
                        .map(|(i, w)| w * 2f64.powf(-alpha * (i * k) as f64))
                        .sum();
                worst = worst.max((s - if k == 0 { 1.0 } else { 0.0 }).abs());
            }
            w1 = w1.max((t.cumulative[0] - 1.0).abs());
        }
    }
    // [1 1; 1 1/2] w = [1, 0]
    let det = 0.5 - 1.0;
    let direct = [0.5 / det, -1.0 / det];
    let t = compute_weights(1.0, 2).map_err(|e| e.to_string())?;
    let two = t.w == direct && t.cumulative == vec![1.0, 2.0];
    check(
        worst <= 1e-8 && w1 <= 1e-12 && two,
        format!(
            "max Vandermonde residual {worst:.1e}, |W1 - 1| {w1:.1e}, (alpha 1, R 2) W = {:?}",
            t.cumulative
        ),
    )
}

fn calibration_bands() -> Outcome {
    let model = AlmModel::reference();
    let u = model.scr_reference(0.005).map_err(|e| e.to_string())?;
    let problem = AlmProblem::new(model, 0.0).map_err(|e| e.to_string())?;
    let cfg = PilotConfig {
        k_grid: vec![8, 16, 32, 64, 128],
        n_pilot: 1_000_000,
        seed: SEED,
        include_c2: false,
    };
    let r = calibrate(&problem, &PayoffTransform::Indicator(u), &cfg).map_err(|e| e.to_string())?;
    let c1 = r.c1.estimate.value;
    let va = r.v1_antithetic.value;
    let vs = r.v1_standard.value;
    let ratio = vs / va;
    check(
        (0.01..=0.05).contains(&c1.abs())
            && (0.01 / 1.6..=0.01 * 1.6).contains(&va)
            && (1.5..=2.8).contains(&ratio),
        format!(
            "c1_hat = {c1:.4} (|c1| in [0.01, 0.05]), V1_A = {va:.4} (in [0.00625, 0.016]), V1_S / V1_A = {ratio:.2} (in [1.5, 2.8])"
        ),
    )
}

fn desk_efficiency() -> Outcome {
    let cfg = ExperimentConfig::from_toml_str(&format!(
        "schema_version = 1\nseed = {SEED}\n[benchmark]\nbudgets = [1e7]\nreplications = 64\n"
    ))
    .map_err(|e| e.to_string())?;
    let records = run_benchmark(&cfg, &mut |r| {
        eprintln!(
            "  {} K {} R {} cdf rmse {:.3e}",
            r.estimator, r.k, r.levels, r.cdf_rmse
        )
    })
    .map_err(|e| e.to_string())?;
    let get = |id: EstimatorId| -> Result<&BenchmarkRecord, String> {
        records
            .iter()
            .find(|r| r.estimator == id)
            .ok_or_else(|| format!("missing {id}"))
    };
    let pairs = [
        (EstimatorId::Ml2rTable2, EstimatorId::Nested),
        (EstimatorId::Ml2rTable2, EstimatorId::Ml2rTable1),
        (EstimatorId::MlmcTable2, EstimatorId::MlmcTable1),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, b) in pairs {
        let cmp = compare_mse(&get(a)?.cdf_summary(), &get(b)?.cdf_summary())
            .map_err(|e| e.to_string())?;
        ok &= cmp.not_worse(0.95);
        parts.push(format!(
            "MSE {a}/{b} = {:.3} (p_worse {:.3})",
            cmp.ratio, cmp.p_worse
        ));
    }
    check(ok, parts.join("; "))
}

fn identities() -> Outcome {
    let n = identity_checks_performed();
    check(
        n > 0,
        format!("{n} emitted plans checked inline, no identity violation"),
    )
}

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let checks: [Check; 9] = [
        ("closed_form_quantile", closed_form_quantile),
        ("parameter_tables", parameter_tables),
        ("variance_identity", variance_identity),
        ("dominance", dominance),
        ("cardano", cardano),
        ("weights", weights),
        ("calibration_bands", calibration_bands),
        ("desk_efficiency", desk_efficiency),
        ("plan_identities", identities),
    ];
    let mut failed = 0;
    for (name, f) in checks {
        if !filters.is_empty() && !filters.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let t = Instant::now();
        let res = f();
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(d) => println!("PASS {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name}: {d} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance check(s) failed");
        ExitCode::FAILURE
    }
}
