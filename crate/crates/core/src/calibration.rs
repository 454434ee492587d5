//! Pilot estimation of the structural constants.
//!
//! For each base size `K` of a grid, `n_pilot` outer samples are drawn with
//! `2K` inner draws (`4K` when `c2` is requested). The same draws give
//! `Y_K`, `Y_2K`, `Y_4K`, the antithetic and standard level differences, and
//! the second difference `2 Y_4K - 3 Y_2K + Y_K`. The constants follow from
//! weighted least-squares fits through the origin of
//!
//! * `E[Y_2K - Y_K] ~ -c1 / (2K)`
//! * `E[2 Y_4K - 3 Y_2K + Y_K] ~ 6 c2 / (4K)^2`
//! * `Var[dY_2K] ~ V1 / (2K)^(1/2)`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nested::{inner_sum, map_outer, NestedProblem, PayoffTransform};
use crate::optimizer::StructuralConstants;

/// Two-sided 95% normal quantile used for confidence intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Pilot design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotConfig {
    pub k_grid: Vec<u64>,
    pub n_pilot: u64,
    pub seed: u64,
    /// Also draw `4K` inner samples to estimate `c2`.
    #[serde(default = "default_true")]
    pub include_c2: bool,
}

fn default_true() -> bool {
    true
}

impl Default for PilotConfig {
    fn default() -> Self {
        Self {
            k_grid: vec![8, 16, 32, 64, 128],
            n_pilot: 1_000_000,
            seed: 0,
            include_c2: true,
        }
    }
}

impl PilotConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_grid.is_empty() {
            return Err(Error::invalid("K grid is empty"));
        }
        if self.k_grid[0] == 0 || self.k_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "K grid must be positive and strictly increasing",
            ));
        }
        if self.k_grid.len() > 254 {
            return Err(Error::invalid("K grid has too many cells"));
        }
        let factor = if self.include_c2 { 4 } else { 2 };
        if self.k_grid.last().unwrap() * factor >= u32::MAX as u64 {
            return Err(Error::invalid("K grid exceeds the inner stream size"));
        }
        if self.n_pilot < 1000 {
            return Err(Error::invalid("n_pilot must be at least 1000"));
        }
        Ok(())
    }
}

/// Sample mean and variance with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub se_mean: f64,
    pub variance: f64,
    pub se_variance: f64,
}

impl Moments {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let (mut m2, mut m4) = (0.0, 0.0);
        for v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m4 += d2 * d2;
        }
        let variance = m2 / (n - 1.0);
        let m2n = m2 / n;
        let m4n = m4 / n;
        Self {
            mean,
            se_mean: (variance / n).sqrt(),
            variance,
            se_variance: ((m4n - m2n * m2n).max(0.0) / n).sqrt(),
        }
    }
}

/// Pilot statistics at one base size `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotCell {
    pub k: u64,
    pub n: u64,
    /// `Y_K`.
    pub base: Moments,
    /// Antithetic difference `Y_2K - (Y_K + Y'_K)/2`.
    pub antithetic: Moments,
    /// Standard difference `Y_2K - Y_K`.
    pub standard: Moments,
    /// `2 Y_4K - 3 Y_2K + Y_K` when drawn.
    pub second_difference: Option<Moments>,
}

/// Point estimate with a 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub value: f64,
    pub se: f64,
    pub low: f64,
    pub high: f64,
}

impl Interval {
    fn new(value: f64, se: f64) -> Self {
        Self {
            value,
            se,
            low: value - Z95 * se,
            high: value + Z95 * se,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }
}

/// Fitted coefficient together with the resolution flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasFit {
    pub estimate: Interval,
    /// Every pilot mean is within two standard errors of zero.
    pub below_resolution: bool,
}

/// Summary of a calibration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub k_grid: Vec<u64>,
    pub n_pilot: u64,
    pub seed: u64,
    pub c1: BiasFit,
    pub c2: Option<BiasFit>,
    /// `c2 / c1`.
    pub a_hat: Option<f64>,
    pub v1_antithetic: Interval,
    pub v1_standard: Interval,
    /// Largest pilot variance of `Y_K`.
    pub sigma1_sq: f64,
    /// Inner plus outer draws spent, in inner-sample units.
    pub pilot_cost: f64,
    pub cells: Vec<PilotCell>,
}

impl CalibrationReport {
    /// Structural constants for the optimizers; `growth_a` is kept at the
    /// given default when the `c2` interval cannot separate it.
    pub fn to_constants(&self, antithetic: bool, tau: f64, default_a: f64) -> StructuralConstants {
        StructuralConstants {
            alpha: 1.0,
            beta: 0.5,
            c1: self.c1.estimate.value,
            growth_a: self.recommended_growth(default_a),
            c_tilde: None,
            v1: if antithetic {
                self.v1_antithetic.value
            } else {
                self.v1_standard.value
            },
            sigma1_sq: self.sigma1_sq,
            tau,
        }
    }

    /// `a_hat` when its interval excludes `default_a` and it exceeds 1;
    /// otherwise `default_a`.
    pub fn recommended_growth(&self, default_a: f64) -> f64 {
        match (self.c2, self.a_hat) {
            (Some(c2), Some(a)) if !c2.below_resolution && self.c1.estimate.value != 0.0 => {
                let (lo, hi) = {
                    let x = c2.estimate.low / self.c1.estimate.value;
                    let y = c2.estimate.high / self.c1.estimate.value;
                    (x.min(y), x.max(y))
                };
                if (lo..=hi).contains(&default_a) || a <= 1.0 || !a.is_finite() {
                    default_a
                } else {
                    a
                }
            }
            _ => default_a,
        }
    }
}

/// Weighted least squares through the origin, `y ~ b x`, weights `1/se^2`.
fn fit_through_origin(xs: &[f64], ys: &[f64], ses: &[f64]) -> Interval {
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let floor = (1e-12 * scale).max(1e-300);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for ((x, y), se) in xs.iter().zip(ys).zip(ses) {
        let w = 1.0 / se.max(floor).powi(2);
        sxy += w * x * y;
        sxx += w * x * x;
    }
    if scale == 0.0 {
        return Interval::new(0.0, 0.0);
    }
    Interval::new(sxy / sxx, 1.0 / sxx.sqrt())
}

/// Runs the pilot simulation.
pub fn run_pilot<P: NestedProblem>(
    problem: &P,
    f: &PayoffTransform,
    config: &PilotConfig,
) -> Result<Vec<PilotCell>> {
    config.validate()?;
    let mut cells = Vec::with_capacity(config.k_grid.len());
    for (i, &k) in config.k_grid.iter().enumerate() {
        let kk = k as u32;
        let four = config.include_c2;
        let rows: Vec<[f64; 4]> =
            map_outer(problem, config.seed, i + 1, config.n_pilot, |x, s| {
                let a = inner_sum(problem, x, s, 0, kk)?;
                let b = inner_sum(problem, x, s, kk, kk)?;
                let (y_k, y_k_alt) = (f.apply(a / k as f64), f.apply(b / k as f64));
                let m2 = 0.5 * (a / k as f64 + b / k as f64);
                let y_2k = f.apply(m2);
                let second = if four {
                    let c = inner_sum(problem, x, s, 2 * kk, 2 * kk)? / (2 * k) as f64;
                    let y_4k = f.apply(0.5 * (m2 + c));
                    2.0 * y_4k - 3.0 * y_2k + y_k
                } else {
                    0.0
                };
                Ok([y_k, y_2k - 0.5 * (y_k + y_k_alt), y_2k - y_k, second])
            })?;
        let column = |c: usize| -> Vec<f64> { rows.iter().map(|r| r[c]).collect() };
        for (j, r) in rows.iter().enumerate() {
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    level: i + 1,
                    index: j as u64,
                });
            }
        }
        cells.push(PilotCell {
            k,
            n: config.n_pilot,
            base: Moments::from_values(&column(0)),
            antithetic: Moments::from_values(&column(1)),
            standard: Moments::from_values(&column(2)),
            second_difference: four.then(|| Moments::from_values(&column(3))),
        });
    }
    Ok(cells)
}

fn c1_from_cells(cells: &[PilotCell]) -> BiasFit {
    let xs: Vec<f64> = cells.iter().map(|c| 1.0 / (2 * c.k) as f64).collect();
    let ys: Vec<f64> = cells.iter().map(|c| -c.antithetic.mean).collect();
    let ses: Vec<f64> = cells.iter().map(|c| c.antithetic.se_mean).collect();
    BiasFit {
        estimate: fit_through_origin(&xs, &ys, &ses),
        below_resolution: cells
            .iter()
            .all(|c| c.antithetic.mean.abs() <= 2.0 * c.antithetic.se_mean),
    }
}

fn c2_from_cells(cells: &[PilotCell]) -> Option<BiasFit> {
    let d: Vec<(u64, Moments)> = cells
        .iter()
        .map(|c| c.second_difference.map(|m| (c.k, m)))
        .collect::<Option<_>>()?;
    let xs: Vec<f64> = d
        .iter()
        .map(|(k, _)| 6.0 / ((4 * k) as f64).powi(2))
        .collect();
    let ys: Vec<f64> = d.iter().map(|(_, m)| m.mean).collect();
    let ses: Vec<f64> = d.iter().map(|(_, m)| m.se_mean).collect();
    Some(BiasFit {
        estimate: fit_through_origin(&xs, &ys, &ses),
        below_resolution: d.iter().all(|(_, m)| m.mean.abs() <= 2.0 * m.se_mean),
    })
}

fn v1_from_cells(cells: &[PilotCell], antithetic: bool) -> Interval {
    let pick = |c: &PilotCell| if antithetic { c.antithetic } else { c.standard };
    let xs: Vec<f64> = cells
        .iter()
        .map(|c| ((2 * c.k) as f64).powf(-0.5))
        .collect();
    let ys: Vec<f64> = cells.iter().map(|c| pick(c).variance).collect();
    let ses: Vec<f64> = cells.iter().map(|c| pick(c).se_variance).collect();
    let fit = fit_through_origin(&xs, &ys, &ses);
    let upper = cells
        .iter()
        .map(|c| {
            let s = ((2 * c.k) as f64).sqrt();
            Interval::new(pick(c).variance * s, pick(c).se_variance * s)
        })
        .fold(None::<Interval>, |best, iv| match best {
            Some(b) if b.value >= iv.value => Some(b),
            _ => Some(iv),
        })
        .expect("grid is non-empty");
    if upper.value > fit.value {
        upper
    } else {
        fit
    }
}

/// Full calibration: one pilot pass, then every fit.
pub fn calibrate<P: NestedProblem>(
    problem: &P,
    f: &PayoffTransform,
    config: &PilotConfig,
) -> Result<CalibrationReport> {
    let cells = run_pilot(problem, f, config)?;
    let tau = problem.outer_cost_tau();
    let factor = if config.include_c2 { 4 } else { 2 };
    let pilot_cost = config
        .k_grid
        .iter()
        .map(|&k| config.n_pilot as f64 * (tau + (factor * k) as f64))
        .sum();
    let c1 = c1_from_cells(&cells);
    let c2 = c2_from_cells(&cells);
    let a_hat = c2.map(|c2| c2.estimate.value / c1.estimate.value);
    let sigma1_sq = cells.iter().map(|c| c.base.variance).fold(0.0f64, f64::max);
    Ok(CalibrationReport {
        k_grid: config.k_grid.clone(),
        n_pilot: config.n_pilot,
        seed: config.seed,
        c1,
        c2,
        a_hat,
        v1_antithetic: v1_from_cells(&cells, true),
        v1_standard: v1_from_cells(&cells, false),
        sigma1_sq,
        pilot_cost,
        cells,
    })
}

/// First bias coefficient with its interval.
pub fn estimate_c1<P: NestedProblem>(
    problem: &P,
    f: &PayoffTransform,
    k_grid: &[u64],
    n_pilot: u64,
    seed: u64,
) -> Result<BiasFit> {
    let config = PilotConfig {
        k_grid: k_grid.to_vec(),
        n_pilot,
        seed,
        include_c2: false,
    };
    Ok(c1_from_cells(&run_pilot(problem, f, &config)?))
}

/// Second bias coefficient with its interval.
pub fn estimate_c2<P: NestedProblem>(
    problem: &P,
    f: &PayoffTransform,
    k_grid: &[u64],
    n_pilot: u64,
    seed: u64,
) -> Result<BiasFit> {
    let config = PilotConfig {
        k_grid: k_grid.to_vec(),
        n_pilot,
        seed,
        include_c2: true,
    };
    Ok(c2_from_cells(&run_pilot(problem, f, &config)?).expect("second differences were drawn"))
}

/// Level-variance constant for the antithetic or the standard level.
pub fn estimate_v1<P: NestedProblem>(
    problem: &P,
    f: &PayoffTransform,
    k_grid: &[u64],
    n_pilot: u64,
    antithetic: bool,
    seed: u64,
) -> Result<Interval> {
    let config = PilotConfig {
        k_grid: k_grid.to_vec(),
        n_pilot,
        seed,
        include_c2: false,
    };
    Ok(v1_from_cells(&run_pilot(problem, f, &config)?, antithetic))
}

/// First-level variance bound for an indicator target with rough
/// probability `i_rough`: `I (1 - I)`, plus `(1 - 2I) c1` when `c1` is given.
pub fn sigma1_sq_recommendation(i_rough: f64, c1: Option<f64>) -> Result<f64> {
    if !(i_rough > 0.0 && i_rough < 1.0) {
        return Err(Error::invalid(format!(
            "rough probability must lie in (0, 1), got {i_rough}"
        )));
    }
    let base = i_rough * (1.0 - i_rough);
    Ok(match c1 {
        Some(c) => base + (1.0 - 2.0 * i_rough) * c,
        None => base,
    })
}
