use crate::error::{Error, Result};
use crate::nested::NestedProblem;
use crate::rng::StreamRng;

use super::model::{AlmModel, ContractParams, MarketParams};

/// The one-year loss as a nested problem.
///
/// Outer draw: `S_1` under the real-world measure. Inner draw: the remaining
/// `T - 1` years simulated under the risk-neutral measure, returning
/// `psi_0 - e^(-r (T-1)) phi_T S_T`, whose conditional mean is the loss
/// `psi(S_1)`.
#[derive(Debug, Clone)]
pub struct AlmProblem {
    model: AlmModel,
    tau: f64,
    psi0: f64,
    outer_drift: f64,
    inner_drift: f64,
    terminal_discount: f64,
}

impl AlmProblem {
    pub fn new(model: AlmModel, tau: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::invalid(format!("tau must be >= 0, got {tau}")));
        }
        let m = model.market;
        let t = model.contract.maturity;
        Ok(Self {
            psi0: model.psi0(),
            outer_drift: m.mu - 0.5 * m.sigma * m.sigma,
            inner_drift: m.r - 0.5 * m.sigma * m.sigma,
            terminal_discount: (-m.r * (t - 1) as f64).exp(),
            model,
            tau,
        })
    }

    pub fn model(&self) -> &AlmModel {
        &self.model
    }

    /// Runs the contract from `S_1 = x` to maturity using the given
    /// standard normal increments (one per remaining year) and returns the
    /// inner payoff.
    pub fn payoff_from_increments(&self, x: f64, increments: impl Iterator<Item = f64>) -> f64 {
        let m = &self.model;
        let s0 = m.market.s0;
        let mut state = m.year_step(1, m.initial_state(), (x / s0).ln());
        for (i, u) in increments.enumerate() {
            let log_return = self.inner_drift + m.market.sigma * u;
            state = m.year_step(i as u32 + 2, state, log_return);
        }
        self.psi0 - self.terminal_discount * state.phi * state.s
    }
}

/// Builds the benchmark nested problem.
pub fn make_nested_problem(
    market: MarketParams,
    contract: ContractParams,
    tau: f64,
) -> Result<AlmProblem> {
    AlmProblem::new(AlmModel::new(market, contract)?, tau)
}

impl NestedProblem for AlmProblem {
    type Outer = f64;

    fn sample_outer(&self, rng: &mut StreamRng) -> f64 {
        let m = &self.model.market;
        m.s0 * (self.outer_drift + m.sigma * rng.normal()).exp()
    }

    fn sample_inner(&self, x: &f64, rng: &mut StreamRng) -> Result<f64> {
        let steps = self.model.contract.maturity - 1;
        Ok(self.payoff_from_increments(*x, (0..steps).map(|_| rng.normal())))
    }

    fn exact_conditional(&self, x: &f64) -> Option<f64> {
        self.model.psi_loss(*x).ok()
    }

    fn outer_cost_tau(&self) -> f64 {
        self.tau
    }
}
