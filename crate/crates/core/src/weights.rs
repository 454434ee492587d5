//! Richardson-Romberg weights for the weighted multi-level estimator.
//!
//! With refinement ratio 2 the extrapolation weights solve a Vandermonde
//! system that is badly conditioned; they are computed here from the explicit
//! product formula only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of levels.
pub const MAX_LEVELS: usize = 30;

/// Extrapolation weights `w` and their suffix sums `W` (the level weights).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub alpha: f64,
    pub levels: usize,
    /// `w_1..w_R`.
    pub w: Vec<f64>,
    /// `W_i = w_i + ... + w_R`; `W_1 = 1`.
    pub cumulative: Vec<f64>,
}

/// Computes `w_i = (-1)^(R-i) / prod_{j != i} |1 - 2^(alpha (j - i))|` and
/// the suffix sums `W_i`.
pub fn compute_weights(alpha: f64, levels: usize) -> Result<WeightTable> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if levels == 0 {
        return Err(Error::invalid("level count must be at least 1"));
    }
    if levels > MAX_LEVELS {
        return Err(Error::invalid(format!(
            "level count {levels} exceeds {MAX_LEVELS}; weights are not reliable in double precision"
        )));
    }
    let w: Vec<f64> = (1..=levels)
        .map(|i| {
            let denom: f64 = (1..=levels)
                .filter(|&j| j != i)
                .map(|j| (1.0 - 2f64.powf(alpha * (j as f64 - i as f64))).abs())
                .product();
            let sign = if (levels - i).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            sign / denom
        })
        .collect();
    let mut cumulative = vec![0.0; levels];
    let mut acc = 0.0;
    for i in (0..levels).rev() {
        acc += w[i];
        cumulative[i] = acc;
    }
    Ok(WeightTable {
        alpha,
        levels,
        w,
        cumulative,
    })
}

/// Level weights `A_r` for a plan: all ones for standard MLMC, the cumulative
/// weights for ML2R.
pub fn level_weights(alpha: f64, levels: usize, weighted: bool) -> Result<Vec<f64>> {
    if weighted {
        Ok(compute_weights(alpha, levels)?.cumulative)
    } else {
        if levels == 0 || levels > MAX_LEVELS {
            return Err(Error::invalid(format!("invalid level count {levels}")));
        }
        Ok(vec![1.0; levels])
    }
}
