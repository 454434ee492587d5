//! Closed-form inner sample size of the plain nested estimator.
//!
//! With `alpha = 1` the nested objective `sigma1_sq (tau + K) / (eps^2 - c1^2/K^2)`
//! is stationary where `eps^2 K^3 - 3 c1^2 K - 2 tau c1^2 = 0`; the positive
//! root is given by Cardano's formula.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::constants::StructuralConstants;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CardanoK {
    pub k_real: f64,
    pub k_int: u64,
}

/// Positive root of `eps^2 x^3 - 3 c1^2 x - 2 tau c1^2 = 0`.
pub fn cardano_root(c1: f64, eps: f64, tau: f64) -> f64 {
    let b = c1.abs();
    let ratio = b / eps;
    if tau == 0.0 {
        return 3f64.sqrt() * ratio;
    }
    let threshold = b / tau;
    if eps < threshold {
        2.0 * ratio * ((eps * tau / b).acos() / 3.0).cos()
    } else if eps == threshold {
        // Double root at -tau; the simple root is 2 tau.
        2.0 * ratio
    } else {
        let s = (tau * tau - ratio * ratio).sqrt();
        ratio.powf(2.0 / 3.0) * ((tau + s).cbrt() + (tau - s).cbrt())
    }
}

/// Nested objective `sigma1_sq (tau + K) / (eps^2 - c1^2 / K^2)`; infinite when
/// the bias constraint fails.
pub fn nested_objective(c: &StructuralConstants, eps: f64, k: f64) -> f64 {
    let bias = c.c1 / k;
    if bias.abs() >= eps {
        return f64::INFINITY;
    }
    c.sigma1_sq * (c.tau + k) / (eps * eps - bias * bias)
}

/// Real minimizer and the better of its two integer neighbours.
pub fn nested_k_cardano(c: &StructuralConstants, eps: f64) -> Result<CardanoK> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    if c.alpha != 1.0 {
        return Err(Error::invalid(
            "the closed-form nested inner size assumes alpha = 1",
        ));
    }
    if c.tau.is_nan() || c.tau < 0.0 || c.c1 == 0.0 {
        return Err(Error::invalid("tau must be >= 0 and c1 non-zero"));
    }
    let k_real = cardano_root(c.c1, eps, c.tau);
    let floor_feasible = (c.c1.abs() / eps).floor() + 1.0;
    let lo = k_real.floor().max(floor_feasible).max(1.0);
    let hi = k_real.ceil().max(floor_feasible).max(1.0);
    let k_int = if nested_objective(c, eps, lo) <= nested_objective(c, eps, hi) {
        lo
    } else {
        hi
    };
    Ok(CardanoK {
        k_real,
        k_int: k_int as u64,
    })
}
