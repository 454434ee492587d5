//! Command-line front end; the `nested-mlmc` binary is a thin wrapper
//! around [`run`].

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::alm::{AlmModel, AlmOracles, AlmProblem};
use crate::bench::{
    run_benchmark, run_tau_sweep, save_csv, save_json, write_csv, write_json, ExperimentConfig,
    Manifest, References,
};
use crate::calibration::{calibrate, CalibrationReport};
use crate::error::{Error, Result};
use crate::nested::{estimate_cdf_and_quantile, EstimatorKind, PayoffTransform};
use crate::optimizer::{invert_budget, plan_table1, plan_table2, PlanOutcome};
use crate::rng::{PathStream, MAX_OUTER_INDEX};

#[derive(Debug, Parser)]
#[command(
    name = "nested-mlmc",
    version,
    about = "Nested and multi-level Monte Carlo for loss probabilities and quantiles"
)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; overrides the config.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format of tables and reports.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rule {
    Table1,
    Table2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Nested,
    Mlmc,
    Ml2r,
}

impl From<Kind> for EstimatorKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Nested => EstimatorKind::Nested,
            Kind::Mlmc => EstimatorKind::StandardMlmc,
            Kind::Ml2r => EstimatorKind::Ml2r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Cdf,
    Quantile,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pilot estimation of c1, c2, V1 and sigma1^2.
    Calibrate {
        #[arg(long)]
        n_pilot: Option<u64>,
        /// Comma-separated base sizes.
        #[arg(long, value_delimiter = ',')]
        k_grid: Option<Vec<u64>>,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Estimator parameters for a target precision or budget (JSON).
    Plan {
        #[arg(long, conflicts_with = "budget", required_unless_present = "budget")]
        epsilon: Option<f64>,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, value_enum, default_value = "ml2r")]
        kind: Kind,
        #[arg(long, value_enum, default_value = "table2")]
        rule: Rule,
    },
    /// One estimate of the CDF at the threshold or of the quantile.
    Estimate {
        #[arg(long, value_enum, default_value = "cdf")]
        target: Target,
        /// Quantile level.
        #[arg(long)]
        p: Option<f64>,
        /// CDF threshold; defaults to the closed-form quantile.
        #[arg(long)]
        u: Option<f64>,
        #[arg(long, conflicts_with = "budget")]
        epsilon: Option<f64>,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, value_enum, default_value = "ml2r")]
        kind: Kind,
        #[arg(long, value_enum, default_value = "table2")]
        rule: Rule,
    },
    /// RMSE-versus-cost benchmark of the configured estimators.
    Benchmark,
    /// Efficiency of the optimized parameters across outer costs.
    TauSweep,
    /// Closed-form oracles of the life-insurance model.
    AlmReference {
        /// Points of the loss curve written to `psi_curve.csv` (with --out).
        #[arg(long, default_value_t = 400)]
        curve_points: usize,
        /// Exact loss draws written to `loss_samples.csv` (with --out).
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit status. Results go to `out`, diagnostics to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            if e.use_stderr() {
                eprint!("{e}");
            } else {
                let _ = write!(out, "{e}");
            }
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    let out_dir = cli.out.clone();
    if let Some(d) = &out_dir {
        cfg.output.dir = d.clone();
    }
    let format = cli.format.unwrap_or(Format::Csv);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    // Results are buffered so the worker pool does not need a `Send` writer.
    let mut buf: Vec<u8> = Vec::new();
    let result = pool.install(|| {
        let out: &mut dyn Write = &mut buf;
        match cli.command {
            Command::Calibrate {
                n_pilot,
                k_grid,
                tau,
            } => {
                if let Some(n) = n_pilot {
                    cfg.calibration.n_pilot = n;
                }
                if let Some(k) = k_grid {
                    cfg.calibration.k_grid = k;
                }
                cmd_calibrate(&cfg, tau, format, out)
            }
            Command::Plan {
                epsilon,
                budget,
                tau,
                kind,
                rule,
            } => {
                let o = make_plan(&cfg, epsilon, budget, tau, kind, rule)?;
                print_json(out, &o)
            }
            Command::Estimate {
                target,
                p,
                u,
                epsilon,
                budget,
                tau,
                kind,
                rule,
            } => cmd_estimate(&cfg, target, p, u, epsilon, budget, tau, kind, rule, out),
            Command::Benchmark => cmd_benchmark(&cfg, format, out),
            Command::TauSweep => cmd_tau_sweep(&cfg, format, out),
            Command::AlmReference {
                curve_points,
                samples,
            } => cmd_alm_reference(&cfg, out_dir.as_deref(), curve_points, samples, format, out),
        }
    });
    out.write_all(&buf)?;
    result
}

fn print_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    write_json(out, v)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn make_plan(
    cfg: &ExperimentConfig,
    epsilon: Option<f64>,
    budget: Option<f64>,
    tau: Option<f64>,
    kind: Kind,
    rule: Rule,
) -> Result<PlanOutcome> {
    let tau = tau.unwrap_or(cfg.problem.tau);
    let c = cfg.structural_constants(tau)?;
    let kind = EstimatorKind::from(kind);
    let k_floor = cfg.benchmark.k_floor;
    let plan_at = |e: f64| match rule {
        Rule::Table1 => plan_table1(&c, e, kind, k_floor),
        Rule::Table2 => plan_table2(&c, e, kind, k_floor),
    };
    match (epsilon, budget) {
        (Some(e), _) => plan_at(e),
        (None, Some(b)) => invert_budget(b, plan_at),
        (None, None) => Err(Error::invalid("give --epsilon or --budget")),
    }
}

fn cmd_calibrate(
    cfg: &ExperimentConfig,
    tau: Option<f64>,
    format: Format,
    out: &mut dyn Write,
) -> Result<()> {
    let tau = tau.unwrap_or(cfg.problem.tau);
    let model = cfg.model()?;
    let refs = References::resolve(cfg, &model)?;
    let problem = AlmProblem::new(model, tau)?;
    let pilot = cfg.calibration.pilot(cfg.seed);
    let report = calibrate(
        &problem,
        &PayoffTransform::Indicator(refs.threshold),
        &pilot,
    )?;
    let dir = &cfg.output.dir;
    ensure_dir(dir)?;
    let rows = CalibrationRow::from_report(&report);
    save_json(&dir.join("calibration.json"), &report)?;
    save_csv(&dir.join("calibration.csv"), &rows)?;
    Manifest::new(
        "calibrate",
        cfg,
        vec!["calibration.json".into(), "calibration.csv".into()],
    )?
    .write(dir)?;
    match format {
        Format::Json => print_json(out, &report),
        Format::Csv => write_csv(out, &rows),
    }
}

/// Per-K calibration row with the fitted relations alongside the data.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct CalibrationRow {
    pub k: u64,
    pub n: u64,
    pub y_mean: f64,
    pub y_variance: f64,
    pub antithetic_mean: f64,
    pub antithetic_se: f64,
    pub antithetic_variance: f64,
    pub antithetic_variance_se: f64,
    pub standard_mean: f64,
    pub standard_se: f64,
    pub standard_variance: f64,
    pub standard_variance_se: f64,
    pub second_difference_mean: Option<f64>,
    pub second_difference_se: Option<f64>,
    /// `-c1_hat / (2K)`.
    pub bias_fit: f64,
    /// `V1_A / sqrt(2K)`.
    pub antithetic_variance_fit: f64,
    /// `V1_S / sqrt(2K)`.
    pub standard_variance_fit: f64,
}

impl CalibrationRow {
    pub fn from_report(r: &CalibrationReport) -> Vec<Self> {
        r.cells
            .iter()
            .map(|c| {
                let two_k = (2 * c.k) as f64;
                Self {
                    k: c.k,
                    n: c.n,
                    y_mean: c.base.mean,
                    y_variance: c.base.variance,
                    antithetic_mean: c.antithetic.mean,
                    antithetic_se: c.antithetic.se_mean,
                    antithetic_variance: c.antithetic.variance,
                    antithetic_variance_se: c.antithetic.se_variance,
                    standard_mean: c.standard.mean,
                    standard_se: c.standard.se_mean,
                    standard_variance: c.standard.variance,
                    standard_variance_se: c.standard.se_variance,
                    second_difference_mean: c.second_difference.map(|m| m.mean),
                    second_difference_se: c.second_difference.map(|m| m.se_mean),
                    bias_fit: -r.c1.estimate.value / two_k,
                    antithetic_variance_fit: r.v1_antithetic.value / two_k.sqrt(),
                    standard_variance_fit: r.v1_standard.value / two_k.sqrt(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Serialize)]
struct EstimateOutput {
    target: &'static str,
    value: f64,
    threshold: f64,
    quantile_level: f64,
    reference: f64,
    quantile_status: String,
    realized_cost: f64,
    seed: u64,
    plan: PlanOutcome,
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    cfg: &ExperimentConfig,
    target: Target,
    p: Option<f64>,
    u: Option<f64>,
    epsilon: Option<f64>,
    budget: Option<f64>,
    tau: Option<f64>,
    kind: Kind,
    rule: Rule,
    out: &mut dyn Write,
) -> Result<()> {
    let mut cfg = cfg.clone();
    if let Some(p) = p {
        cfg.targets.quantile_level = p;
    }
    if u.is_some() {
        cfg.targets.threshold = u;
    }
    cfg.validate()?;
    let tau = tau.unwrap_or(cfg.problem.tau);
    let budget = if epsilon.is_none() && budget.is_none() {
        Some(1e6)
    } else {
        budget
    };
    let outcome = make_plan(&cfg, epsilon, budget, Some(tau), kind, rule)?;
    let model = cfg.model()?;
    let refs = References::resolve(&cfg, &model)?;
    let problem = AlmProblem::new(model, tau)?;
    let est = estimate_cdf_and_quantile(
        &problem,
        &outcome.plan,
        refs.threshold,
        refs.quantile_level,
        cfg.seed,
    )?;
    let (name, value, reference) = match target {
        Target::Cdf => ("cdf", est.cdf_at_u, refs.cdf),
        Target::Quantile => ("quantile", est.quantile.value, refs.quantile),
    };
    print_json(
        out,
        &EstimateOutput {
            target: name,
            value,
            threshold: refs.threshold,
            quantile_level: refs.quantile_level,
            reference,
            quantile_status: format!("{:?}", est.quantile.status),
            realized_cost: est.result.consumed_cost,
            seed: cfg.seed,
            plan: outcome,
        },
    )
}

fn cmd_benchmark(cfg: &ExperimentConfig, format: Format, out: &mut dyn Write) -> Result<()> {
    let dir = &cfg.output.dir;
    ensure_dir(dir)?;
    let records = run_benchmark(cfg, &mut |r| {
        eprintln!(
            "{} grid {} eps {:.3e} cdf rmse {:.3e} quantile rmse {:.3e}",
            r.estimator, r.grid_index, r.epsilon, r.cdf_rmse, r.quantile_rmse
        )
    })?;
    let name = match format {
        Format::Csv => {
            save_csv(&dir.join("benchmark.csv"), &records)?;
            "benchmark.csv"
        }
        Format::Json => {
            save_json(&dir.join("benchmark.json"), &records)?;
            "benchmark.json"
        }
    };
    Manifest::new("benchmark", cfg, vec![name.into()])?.write(dir)?;
    writeln!(out, "{}", dir.join(name).display())?;
    Ok(())
}

fn cmd_tau_sweep(cfg: &ExperimentConfig, format: Format, out: &mut dyn Write) -> Result<()> {
    let dir = &cfg.output.dir;
    ensure_dir(dir)?;
    let sweep = run_tau_sweep(cfg, &mut |r| {
        eprintln!(
            "tau {} {:?} {} mse {:?} efficiency {:?}",
            r.tau, r.rule, r.status, r.cdf_mse, r.efficiency
        )
    })?;
    let name = match format {
        Format::Csv => {
            save_csv(&dir.join("tau_sweep.csv"), &sweep.records)?;
            "tau_sweep.csv"
        }
        Format::Json => {
            save_json(&dir.join("tau_sweep.json"), &sweep.records)?;
            "tau_sweep.json"
        }
    };
    save_json(&dir.join("tau_sweep_trend.json"), &sweep.trend)?;
    Manifest::new(
        "tau-sweep",
        cfg,
        vec![name.into(), "tau_sweep_trend.json".into()],
    )?
    .write(dir)?;
    writeln!(out, "{}", dir.join(name).display())?;
    Ok(())
}

#[derive(Debug, Serialize, serde::Deserialize)]
struct CurvePoint {
    x: f64,
    loss: f64,
}

#[derive(Debug, Serialize, serde::Deserialize)]
struct LossSample {
    s1: f64,
    loss: f64,
}

/// Text rendering of the oracles, one `name = value` per line.
pub fn render_oracles(o: &AlmOracles) -> String {
    let q = match o.scr_quantile {
        Some(q) => format!("{q:.6}"),
        None => "unavailable (x1 < x2)".into(),
    };
    format!(
        "z = {:.15}\nd = {:.15}\nOF0 = {:.10}\nx1 = {:.10}\nx2 = {:.10}\ncertificate = {}\nq99.5 = {q}\n",
        o.z,
        o.d,
        o.psi0,
        o.x1,
        o.x2,
        if o.certificate { "holds" } else { "fails" },
    )
}

fn cmd_alm_reference(
    cfg: &ExperimentConfig,
    out_dir: Option<&Path>,
    curve_points: usize,
    samples: u64,
    format: Format,
    out: &mut dyn Write,
) -> Result<()> {
    let model = cfg.model()?;
    let oracles = model.oracles();
    match format {
        Format::Json => print_json(out, &oracles)?,
        Format::Csv => write!(out, "{}", render_oracles(&oracles))?,
    }
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        save_csv(
            &dir.join("psi_curve.csv"),
            &psi_curve(&model, curve_points)?,
        )?;
        save_csv(
            &dir.join("loss_samples.csv"),
            &loss_samples(&model, samples, cfg.seed)?,
        )?;
        save_json(&dir.join("alm_reference.json"), &oracles)?;
        Manifest::new(
            "alm-reference",
            cfg,
            vec![
                "alm_reference.json".into(),
                "psi_curve.csv".into(),
                "loss_samples.csv".into(),
            ],
        )?
        .write(dir)?;
    }
    Ok(())
}

fn psi_curve(model: &AlmModel, n: usize) -> Result<Vec<CurvePoint>> {
    let top = 4.0 * model.market.s0;
    (1..=n.max(2))
        .map(|i| {
            let x = top * i as f64 / n.max(2) as f64;
            Ok(CurvePoint {
                x,
                loss: model.psi_loss(x)?,
            })
        })
        .collect()
}

fn loss_samples(model: &AlmModel, n: u64, seed: u64) -> Result<Vec<LossSample>> {
    if n > MAX_OUTER_INDEX {
        return Err(Error::invalid("too many samples"));
    }
    let m = &model.market;
    let drift = m.mu - 0.5 * m.sigma * m.sigma;
    (0..n)
        .map(|j| {
            let z = PathStream::new(seed, 0, j).outer_rng().normal();
            let s1 = m.s0 * (drift + m.sigma * z).exp();
            Ok(LossSample {
                s1,
                loss: model.psi_loss(s1)?,
            })
        })
        .collect()
}
