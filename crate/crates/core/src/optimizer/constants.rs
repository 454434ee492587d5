use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_growth() -> f64 {
    2.0
}

/// Bias and variance constants of a nested problem.
///
/// Weak error: `E[Y_K] - I = c_1/K^alpha + c_2/K^(2 alpha) + ...`; level
/// variance: `Var[dY_K] <= V_1 / K^beta`; first-level variance `sigma1_sq`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralConstants {
    pub alpha: f64,
    pub beta: f64,
    pub c1: f64,
    /// Geometric growth of the bias coefficients, `c_R ~ c_1 a^(R-1)`.
    #[serde(default = "default_growth")]
    pub growth_a: f64,
    /// Upper proxy for `c_tilde` in the closed-form (Table 1) parameters;
    /// defaults to `growth_a`.
    #[serde(default)]
    pub c_tilde: Option<f64>,
    pub v1: f64,
    pub sigma1_sq: f64,
    #[serde(default)]
    pub tau: f64,
}

impl StructuralConstants {
    /// Constants of the life-insurance benchmark at the 99.5% loss quantile,
    /// with the antithetic level variance.
    pub fn alm_reference(tau: f64) -> Self {
        Self {
            alpha: 1.0,
            beta: 0.5,
            c1: 0.025,
            growth_a: 2.0,
            c_tilde: None,
            v1: 0.01,
            sigma1_sq: 0.005,
            tau,
        }
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        Self {
            tau,
            ..self.clone()
        }
    }

    pub fn c_tilde(&self) -> f64 {
        self.c_tilde.unwrap_or(self.growth_a)
    }

    /// `c_R = c_1 a^(R-1)`.
    pub fn c_r(&self, levels: usize) -> f64 {
        self.c1 * self.growth_a.powi(levels as i32 - 1)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        pos("alpha", self.alpha)?;
        pos("beta", self.beta)?;
        if self.beta > 2.0 {
            return Err(Error::invalid(format!(
                "beta must lie in (0, 2], got {}",
                self.beta
            )));
        }
        if self.c1 == 0.0 || !self.c1.is_finite() {
            return Err(Error::invalid("c1 must be finite and non-zero"));
        }
        if !(self.growth_a > 1.0 && self.growth_a.is_finite()) {
            return Err(Error::invalid(format!(
                "growth_a must exceed 1, got {}",
                self.growth_a
            )));
        }
        if let Some(c) = self.c_tilde {
            pos("c_tilde", c)?;
        }
        pos("v1", self.v1)?;
        pos("sigma1_sq", self.sigma1_sq)?;
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(format!(
                "tau must be >= 0, got {}",
                self.tau
            )));
        }
        Ok(())
    }
}
