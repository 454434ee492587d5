use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights;

/// Which family of estimator a plan describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Nested,
    StandardMlmc,
    Ml2r,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Nested => "nested",
            EstimatorKind::StandardMlmc => "standard_mlmc",
            EstimatorKind::Ml2r => "ml2r",
        }
    }
}

/// Parameters of a (weighted) multi-level estimator.
///
/// `j` and `k` are real-valued proxies; the realized outer sizes are
/// `ceil(j * q_r)` and the inner sizes `ceil(k) * 2^(r-1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlmcPlan {
    pub kind: EstimatorKind,
    pub j: f64,
    pub q: Vec<f64>,
    pub k: f64,
    pub levels: usize,
    pub level_weights: Vec<f64>,
}

impl MlmcPlan {
    /// Builds a plan, filling in the level weights for the given kind.
    pub fn new(kind: EstimatorKind, j: f64, q: Vec<f64>, k: f64, alpha: f64) -> Result<Self> {
        let levels = q.len();
        let level_weights = match kind {
            EstimatorKind::Nested => vec![1.0; levels],
            EstimatorKind::StandardMlmc => weights::level_weights(alpha, levels, false)?,
            EstimatorKind::Ml2r => weights::level_weights(alpha, levels, true)?,
        };
        let plan = Self {
            kind,
            j,
            q,
            k,
            levels,
            level_weights,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Plain nested estimator with `j` outer and `k` inner samples.
    pub fn nested(j: u64, k: u64) -> Result<Self> {
        Self::new(EstimatorKind::Nested, j as f64, vec![1.0], k as f64, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0
            || self.q.len() != self.levels
            || self.level_weights.len() != self.levels
        {
            return Err(Error::invalid(
                "plan level count does not match q / weights",
            ));
        }
        if !(self.j > 0.0 && self.j.is_finite()) {
            return Err(Error::invalid(format!(
                "J must be positive, got {}",
                self.j
            )));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::invalid(format!(
                "K must be positive, got {}",
                self.k
            )));
        }
        if self.q.iter().any(|&q| !(q > 0.0 && q.is_finite())) {
            return Err(Error::invalid("every q_r must be positive"));
        }
        let s: f64 = self.q.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("q sums to {s}, expected 1")));
        }
        if (self.level_weights[0] - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("first level weight must be 1"));
        }
        match self.kind {
            EstimatorKind::Nested if self.levels != 1 => {
                return Err(Error::invalid("nested plans have exactly one level"))
            }
            EstimatorKind::StandardMlmc if self.level_weights.iter().any(|&a| a != 1.0) => {
                return Err(Error::invalid(
                    "standard MLMC plans have unit level weights",
                ))
            }
            _ => {}
        }
        if self.k.ceil() * 2f64.powi(self.levels as i32 - 1) >= u32::MAX as f64 {
            return Err(Error::Overflow(
                "finest inner size exceeds the stream layout (2^32 - 1 draws)".into(),
            ));
        }
        Ok(())
    }

    /// `ceil(K)`.
    pub fn base_inner(&self) -> u64 {
        self.k.ceil() as u64
    }

    /// `K_r = ceil(K) 2^(r-1)` for `r = 1..R`.
    pub fn inner_sizes(&self) -> Vec<u64> {
        let k0 = self.base_inner();
        (0..self.levels).map(|r| k0 << r).collect()
    }

    /// `J_r = ceil(J q_r)`; fails if a count does not fit the platform integer.
    pub fn outer_counts(&self) -> Result<Vec<u64>> {
        self.q
            .iter()
            .enumerate()
            .map(|(r, &q)| {
                let v = (self.j * q).ceil();
                if !v.is_finite() || v > crate::rng::MAX_OUTER_INDEX as f64 || v > usize::MAX as f64
                {
                    Err(Error::Overflow(format!(
                        "outer count at level {} ({v:e}) does not fit",
                        r + 1
                    )))
                } else {
                    Ok((v as u64).max(1))
                }
            })
            .collect()
    }

    /// Exact cost `sum_r J_r (tau + K_r)` in inner-sample units.
    pub fn realized_cost(&self, tau: f64) -> Result<f64> {
        let js = self.outer_counts()?;
        Ok(js
            .iter()
            .zip(self.inner_sizes())
            .map(|(&j, k)| j as f64 * (tau + k as f64))
            .sum())
    }
}
