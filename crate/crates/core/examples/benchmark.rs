//! A small RMSE-versus-cost benchmark of the five estimators, written as CSV
//! to stdout.

use nested_mlmc::bench::{run_benchmark, write_csv, ExperimentConfig};

fn main() -> nested_mlmc::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(
        r#"
        schema_version = 1
        seed = 11
        [benchmark]
        budgets = [1e4, 1e5]
        replications = 8
        "#,
    )?;
    let records = run_benchmark(&cfg, &mut |r| {
        eprintln!(
            "{} budget {:?}: cdf rmse {:.3e}",
            r.estimator, r.budget, r.cdf_rmse
        );
    })?;
    write_csv(std::io::stdout().lock(), &records)
}
