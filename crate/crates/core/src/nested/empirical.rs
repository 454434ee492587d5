//! Simultaneous estimation of a distribution function value and a quantile
//! of the conditional expectation from one set of multi-level samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::estimator::{first_level_means, upper_level_means, EstimateResult, LevelStats};
use super::plan::MlmcPlan;
use super::problem::NestedProblem;

#[derive(Debug, Clone)]
struct LevelArrays {
    weight: f64,
    n: f64,
    fine: Vec<f64>,
    coarse: Vec<f64>,
    coarse_alt: Vec<f64>,
}

/// Weighted multi-level empirical distribution function of the inner means.
///
/// Level 1 contributes its empirical CDF; level `r >= 2` contributes
/// `A_r / J_r * (#fine <= v - (#coarse <= v + #coarse' <= v) / 2)`.
#[derive(Debug, Clone)]
pub struct EmpiricalMlmcCdf {
    levels: Vec<LevelArrays>,
}

/// How the quantile root was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileStatus {
    /// The estimated CDF crosses `p` exactly once.
    Unique,
    /// Several upward crossings; the smallest one is returned.
    MultipleCrossings,
    /// No crossing on the sample range; an extreme sample value is returned.
    NoSignChange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileRoot {
    pub value: f64,
    pub status: QuantileStatus,
    /// Number of upward crossings of level `p` over the sorted jump points.
    pub crossings: usize,
}

fn count_le(sorted: &[f64], v: f64) -> usize {
    sorted.partition_point(|&y| y <= v)
}

impl EmpiricalMlmcCdf {
    fn combine(&self, counts: &[[usize; 3]]) -> f64 {
        self.levels
            .iter()
            .zip(counts)
            .enumerate()
            .map(|(r, (l, c))| {
                if r == 0 {
                    c[0] as f64 / l.n
                } else {
                    l.weight * (c[0] as f64 - 0.5 * (c[1] as f64 + c[2] as f64)) / l.n
                }
            })
            .sum()
    }

    /// Estimated `P(E[F | X] <= v)`; `O(log J_r)` per level.
    pub fn evaluate(&self, v: f64) -> f64 {
        let counts: Vec<[usize; 3]> = self
            .levels
            .iter()
            .map(|l| {
                [
                    count_le(&l.fine, v),
                    count_le(&l.coarse, v),
                    count_le(&l.coarse_alt, v),
                ]
            })
            .collect();
        self.combine(&counts)
    }

    /// First-level part of `evaluate`, which is a proper empirical CDF.
    pub fn evaluate_first_level(&self, v: f64) -> f64 {
        count_le(&self.levels[0].fine, v) as f64 / self.levels[0].n
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Smallest stored jump point `v*` with `evaluate(v*) >= p`.
    ///
    /// The estimate is a step function, so the root is searched over the
    /// sorted union of all stored inner means; each candidate is evaluated from
    /// integer counts exactly as `evaluate` does.
    pub fn quantile(&self, p: f64) -> Result<QuantileRoot> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(format!(
                "probability must lie in (0, 1), got {p}"
            )));
        }
        let mut events: Vec<(f64, usize, usize)> = Vec::new();
        for (r, l) in self.levels.iter().enumerate() {
            events.extend(l.fine.iter().map(|&v| (v, r, 0)));
            events.extend(l.coarse.iter().map(|&v| (v, r, 1)));
            events.extend(l.coarse_alt.iter().map(|&v| (v, r, 2)));
        }
        if events.is_empty() {
            return Err(Error::invalid("no samples stored"));
        }
        events.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut counts = vec![[0usize; 3]; self.levels.len()];
        let mut first: Option<f64> = None;
        let mut crossings = 0;
        let mut below = true;
        let mut i = 0;
        while i < events.len() {
            let v = events[i].0;
            while i < events.len() && events[i].0 == v {
                let (_, r, slot) = events[i];
                counts[r][slot] += 1;
                i += 1;
            }
            let above = self.combine(&counts) >= p;
            if below && above {
                crossings += 1;
                if first.is_none() {
                    first = Some(v);
                }
            }
            below = !above;
        }
        Ok(match first {
            Some(value) => QuantileRoot {
                value,
                status: if crossings == 1 {
                    QuantileStatus::Unique
                } else {
                    QuantileStatus::MultipleCrossings
                },
                crossings,
            },
            None => QuantileRoot {
                value: events.last().map(|e| e.0).unwrap_or(f64::NAN),
                status: QuantileStatus::NoSignChange,
                crossings: 0,
            },
        })
    }
}

/// Result of [`estimate_cdf_and_quantile`].
#[derive(Debug, Clone)]
pub struct CdfQuantileEstimate {
    pub cdf_at_u: f64,
    pub quantile: QuantileRoot,
    /// Level statistics of the indicator `1{. <= u}`.
    pub result: EstimateResult,
    pub cdf: EmpiricalMlmcCdf,
}

/// Draws every level once, stores sorted inner means, and returns the
/// estimated CDF at `u` together with the `p`-quantile.
pub fn estimate_cdf_and_quantile<P: NestedProblem>(
    problem: &P,
    plan: &MlmcPlan,
    u: f64,
    p: f64,
    seed: u64,
) -> Result<CdfQuantileEstimate> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!(
            "probability must lie in (0, 1), got {p}"
        )));
    }
    if !u.is_finite() {
        return Err(Error::invalid("threshold must be finite"));
    }
    plan.validate()?;
    let tau = problem.outer_cost_tau();
    let js = plan.outer_counts()?;
    let ks = plan.inner_sizes();
    let ind = |v: f64| if v <= u { 1.0 } else { 0.0 };

    let mut levels = Vec::with_capacity(plan.levels);
    let mut stats = Vec::with_capacity(plan.levels);
    for r in 0..plan.levels {
        let level = r + 1;
        let weight = plan.level_weights[r];
        if level == 1 {
            let mut means = first_level_means(problem, seed, js[0], ks[0])?;
            check_finite(&means, level)?;
            let values: Vec<f64> = means.iter().map(|&m| ind(m)).collect();
            stats.push(LevelStats::from_values(level, ks[0], weight, &values)?);
            means.sort_unstable_by(f64::total_cmp);
            levels.push(LevelArrays {
                weight,
                n: js[0] as f64,
                fine: means,
                coarse: Vec::new(),
                coarse_alt: Vec::new(),
            });
        } else {
            let means = upper_level_means(problem, seed, level, js[r], ks[r])?;
            let mut fine = Vec::with_capacity(means.len());
            let mut coarse = Vec::with_capacity(means.len());
            let mut coarse_alt = Vec::with_capacity(means.len());
            let mut values = Vec::with_capacity(means.len());
            for m in &means {
                fine.push(m.fine);
                coarse.push(m.coarse);
                coarse_alt.push(m.coarse_alt);
                values.push(ind(m.fine) - 0.5 * (ind(m.coarse) + ind(m.coarse_alt)));
            }
            drop(means);
            check_finite(&fine, level)?;
            check_finite(&coarse, level)?;
            check_finite(&coarse_alt, level)?;
            stats.push(LevelStats::from_values(level, ks[r], weight, &values)?);
            fine.sort_unstable_by(f64::total_cmp);
            coarse.sort_unstable_by(f64::total_cmp);
            coarse_alt.sort_unstable_by(f64::total_cmp);
            levels.push(LevelArrays {
                weight,
                n: js[r] as f64,
                fine,
                coarse,
                coarse_alt,
            });
        }
    }
    let cdf = EmpiricalMlmcCdf { levels };
    let quantile = cdf.quantile(p)?;
    Ok(CdfQuantileEstimate {
        cdf_at_u: cdf.evaluate(u),
        quantile,
        result: EstimateResult::assemble(plan, stats, tau, seed),
        cdf,
    })
}

fn check_finite(values: &[f64], level: usize) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite {
            level,
            index: i as u64,
        }),
        None => Ok(()),
    }
}
