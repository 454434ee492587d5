//! Efficiency of the optimized parameters over the closed-form ones as the
//! outer draws get more expensive.

use nested_mlmc::bench::{run_tau_sweep, ExperimentConfig};

fn main() -> nested_mlmc::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(
        r#"
        schema_version = 1
        seed = 3
        [tau_sweep]
        budget = 1e5
        taus = [0, 50, 100]
        replications = 8
        "#,
    )?;
    let out = run_tau_sweep(&cfg, &mut |_| {})?;
    for r in out.records.iter().filter(|r| r.status == "ok") {
        println!(
            "tau {:>5} {:?}: K {:?} R {:?} mse {:.3e} efficiency {:.2}",
            r.tau,
            r.rule,
            r.k,
            r.levels,
            r.cdf_mse.unwrap_or(f64::NAN),
            r.efficiency.unwrap_or(f64::NAN)
        );
    }
    if let Some(t) = out.trend {
        println!("spearman rho {:.2}, p {:.3}", t.rho, t.p_positive);
    }
    Ok(())
}
