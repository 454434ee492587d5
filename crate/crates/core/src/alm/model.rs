use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::normal::{norm_cdf, norm_inv, norm_pdf};

/// Black-Scholes market of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketParams {
    /// Risk-free rate per year.
    pub r: f64,
    /// Volatility per square-root year.
    pub sigma: f64,
    /// Real-world drift per year.
    pub mu: f64,
    pub s0: f64,
}

impl Default for MarketParams {
    fn default() -> Self {
        Self {
            r: 0.05,
            sigma: 0.15,
            mu: 0.08,
            s0: 100.0,
        }
    }
}

/// Savings contract with a guaranteed rate and profit sharing, monitored
/// yearly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractParams {
    /// Maturity in years.
    pub maturity: u32,
    /// Minimum guaranteed rate.
    pub r_g: f64,
    /// Profit-sharing rate.
    pub gamma: f64,
    /// Annual death rate; every remaining policyholder exits at maturity.
    pub death_rate: f64,
    /// Initial mathematical reserve.
    pub mr0: f64,
}

impl Default for ContractParams {
    fn default() -> Self {
        Self {
            maturity: 10,
            r_g: 0.0,
            gamma: 0.85,
            death_rate: 0.02,
            mr0: 1000.0,
        }
    }
}

impl MarketParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma must be positive"));
        }
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return Err(Error::invalid("s0 must be positive"));
        }
        if !self.r.is_finite() || !self.mu.is_finite() {
            return Err(Error::invalid("r and mu must be finite"));
        }
        Ok(())
    }
}

impl ContractParams {
    pub fn validate(&self) -> Result<()> {
        if self.maturity < 2 {
            return Err(Error::invalid("maturity must be at least 2 years"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::invalid("gamma must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.death_rate) {
            return Err(Error::invalid("death rate must lie in [0, 1)"));
        }
        if !(self.mr0 > 0.0 && self.mr0.is_finite()) {
            return Err(Error::invalid("initial reserve must be positive"));
        }
        if !self.r_g.is_finite() {
            return Err(Error::invalid("guaranteed rate must be finite"));
        }
        Ok(())
    }

    /// Exit rate of year `u` (1-based): `p` before maturity, 1 at maturity.
    pub fn exit_rate(&self, u: u32) -> f64 {
        if u >= self.maturity {
            1.0
        } else {
            self.death_rate
        }
    }
}

/// Expected yearly revaluation factor `E_Q[1 + max(r_g, gamma ln R)]` with
/// `ln R ~ N(r - sigma^2/2, sigma^2)`:
/// `z = 1 + r_g + gamma sigma (phi(d) + d Phi(d))`,
/// `d = (r - sigma^2/2 - r_g/gamma) / sigma`.
pub fn compute_z(market: &MarketParams, contract: &ContractParams) -> f64 {
    let g = contract.gamma;
    if g == 0.0 {
        return 1.0 + contract.r_g.max(0.0);
    }
    let d = z_argument(market, contract);
    1.0 + contract.r_g + g * market.sigma * (norm_pdf(d) + d * norm_cdf(d))
}

fn z_argument(market: &MarketParams, contract: &ContractParams) -> f64 {
    (market.r - 0.5 * market.sigma * market.sigma - contract.r_g / contract.gamma) / market.sigma
}

/// Contract state at the end of a year, after exits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractState {
    /// Number of index shares held.
    pub phi: f64,
    /// Mathematical reserve.
    pub mr: f64,
    /// Index level.
    pub s: f64,
}

/// Closed-form quantities of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlmOracles {
    pub z: f64,
    pub d: f64,
    /// Initial own funds.
    pub psi0: f64,
    pub x1: f64,
    pub x2: f64,
    pub certificate: bool,
    /// 99.5% loss quantile (`None` when the certificate fails).
    pub scr_quantile: Option<f64>,
}

/// The life-insurance asset-liability model with its closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct AlmModel {
    pub market: MarketParams,
    pub contract: ContractParams,
    z: f64,
    /// `B_t`, `t = 0..=T`: own funds are `phi_t S_t - MR_t B_t`.
    liability: Vec<f64>,
}

impl AlmModel {
    pub fn new(market: MarketParams, contract: ContractParams) -> Result<Self> {
        market.validate()?;
        contract.validate()?;
        let z = compute_z(&market, &contract);
        let big_t = contract.maturity;
        let p = contract.death_rate;
        let disc = |n: u32| (-market.r * n as f64).exp() * z.powi(n as i32);
        let liability = (0..=big_t)
            .map(|t| {
                if t == big_t {
                    return 0.0;
                }
                let exits: f64 = (t + 1..big_t)
                    .map(|i| p * (1.0 - p).powi((i - t - 1) as i32) * disc(i - t))
                    .sum();
                exits + (1.0 - p).powi((big_t - t - 1) as i32) * disc(big_t - t)
            })
            .collect();
        Ok(Self {
            market,
            contract,
            z,
            liability,
        })
    }

    /// Model with the reference market and contract.
    pub fn reference() -> Self {
        Self::new(MarketParams::default(), ContractParams::default())
            .expect("reference parameters are valid")
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Liability factor `B_t`.
    pub fn liability_factor(&self, t: u32) -> f64 {
        self.liability[t as usize]
    }

    pub fn initial_shares(&self) -> f64 {
        self.contract.mr0 / self.market.s0
    }

    /// `max(r_g, gamma ln(s_next / s_prev))`.
    pub fn credited_rate(&self, log_return: f64) -> f64 {
        self.contract.r_g.max(self.contract.gamma * log_return)
    }

    pub fn initial_state(&self) -> ContractState {
        ContractState {
            phi: self.initial_shares(),
            mr: self.contract.mr0,
            s: self.market.s0,
        }
    }

    /// Advances the contract through year `t` (1-based) given the index log
    /// return of that year: the reserve is credited, exits are paid by
    /// selling shares, and the reserve of the remaining policyholders is kept.
    #[inline]
    pub fn year_step(&self, t: u32, state: ContractState, log_return: f64) -> ContractState {
        let s = state.s * log_return.exp();
        let credited = state.mr * (1.0 + self.credited_rate(log_return));
        let d = self.contract.exit_rate(t);
        ContractState {
            phi: state.phi - d * credited / s,
            mr: credited * (1.0 - d),
            s,
        }
    }

    /// Own funds at the end of year `t`: `phi_t S_t - MR_t B_t`.
    pub fn own_funds(&self, t: u32, state: &ContractState) -> Result<f64> {
        if t > self.contract.maturity {
            return Err(Error::invalid(format!(
                "time {t} is beyond maturity {}",
                self.contract.maturity
            )));
        }
        Ok(state.phi * state.s - state.mr * self.liability_factor(t))
    }

    /// Initial own funds `psi_0`.
    pub fn psi0(&self) -> f64 {
        self.own_funds(0, &self.initial_state())
            .expect("t = 0 is within maturity")
    }

    /// Own funds at the end of year one when `S_1 = x`.
    pub fn psi1(&self, x: f64) -> f64 {
        let st = self.year_step(1, self.initial_state(), (x / self.market.s0).ln());
        st.phi * st.s - st.mr * self.liability_factor(1)
    }

    /// One-year own-funds loss `psi_0 - psi_1(x)`.
    pub fn psi_loss(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::invalid(format!(
                "index level must be positive, got {x}"
            )));
        }
        Ok(self.psi0() - self.psi1(x))
    }

    /// Kink of the loss function, `s0 e^(r_g/gamma)`.
    pub fn x1(&self) -> f64 {
        if self.contract.gamma == 0.0 {
            return f64::INFINITY;
        }
        self.market.s0 * (self.contract.r_g / self.contract.gamma).exp()
    }

    /// Level above which the profit-sharing branch would make the loss
    /// increase: `s0 gamma ((1 - p) B_1 + p)`.
    pub fn x2(&self) -> f64 {
        let p = self.contract.death_rate;
        self.market.s0 * self.contract.gamma * ((1.0 - p) * self.liability_factor(1) + p)
    }

    /// `x1 >= x2`: the loss is non-increasing in `S_1`.
    pub fn monotonicity_certificate(&self) -> bool {
        self.x1() >= self.x2()
    }

    /// `S_1` at real-world probability level `alpha`.
    pub fn s1_quantile(&self, alpha: f64) -> Result<f64> {
        let m = &self.market;
        Ok(m.s0 * (m.mu - 0.5 * m.sigma * m.sigma + m.sigma * norm_inv(alpha)?).exp())
    }

    /// Closed-form `(1 - alpha)`-quantile of the loss,
    /// `psi(s0 exp(mu - sigma^2/2 + sigma Phi^{-1}(alpha)))`.
    pub fn scr_reference(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !self.monotonicity_certificate() {
            return Err(Error::Numerical(
                "loss is not monotone in S_1 (x1 < x2); estimate the quantile by brute force over psi(S_1) instead"
                    .into(),
            ));
        }
        self.psi_loss(self.s1_quantile(alpha)?)
    }

    /// Exact `P(L <= u)` for a monotone loss: `P(S_1 >= x*)` with
    /// `psi(x*) = u`, the root found by bisection in `ln x`.
    pub fn loss_cdf(&self, u: f64) -> Result<f64> {
        if !self.monotonicity_certificate() {
            return Err(Error::Numerical(
                "loss is not monotone in S_1 (x1 < x2)".into(),
            ));
        }
        let m = &self.market;
        let drift = m.mu - 0.5 * m.sigma * m.sigma;
        let (mut lo, mut hi) = (drift - 40.0 * m.sigma, drift + 40.0 * m.sigma);
        let psi = |z: f64| self.psi_loss(m.s0 * z.exp());
        if psi(lo)? <= u {
            return Ok(1.0);
        }
        if psi(hi)? > u {
            return Ok(0.0);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if psi(mid)? <= u {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        Ok(norm_cdf(-(hi - drift) / m.sigma))
    }

    pub fn oracles(&self) -> AlmOracles {
        let d = if self.contract.gamma == 0.0 {
            f64::NEG_INFINITY
        } else {
            z_argument(&self.market, &self.contract)
        };
        AlmOracles {
            z: self.z,
            d,
            psi0: self.psi0(),
            x1: self.x1(),
            x2: self.x2(),
            certificate: self.monotonicity_certificate(),
            scr_quantile: self.scr_reference(0.005).ok(),
        }
    }

    /// Reserve after `t` years from the closed product
    /// `MR_0 prod_u (1 - d_u)(1 + rho_u)`, given yearly log returns.
    pub fn reserve_closed_form(&self, log_returns: &[f64]) -> f64 {
        log_returns
            .iter()
            .enumerate()
            .fold(self.contract.mr0, |acc, (i, &l)| {
                let d = self.contract.exit_rate(i as u32 + 1);
                acc * (1.0 - d) * (1.0 + self.credited_rate(l))
            })
    }

    /// Shares after `t` years from the explicit sum
    /// `phi_0 - sum_u d_u MR_0 prod_{v<u}(1 - d_v) prod_{v<=u}(1 + rho_v) / S_u`.
    pub fn shares_closed_form(&self, log_returns: &[f64]) -> f64 {
        let mut phi = self.initial_shares();
        let mut s = self.market.s0;
        let mut surv = 1.0;
        let mut growth = 1.0;
        for (i, &l) in log_returns.iter().enumerate() {
            let d = self.contract.exit_rate(i as u32 + 1);
            s *= l.exp();
            growth *= 1.0 + self.credited_rate(l);
            phi -= d * self.contract.mr0 * surv * growth / s;
            surv *= 1.0 - d;
        }
        phi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_oracles() {
        let m = AlmModel::reference();
        let o = m.oracles();
        assert!((o.z - 1.069_021_785_108_486_7).abs() < 1e-13);
        assert!((o.psi0 + 166.250_322_734_603_5).abs() < 1e-9);
        assert!((o.x1 - 100.0).abs() < 1e-12);
        assert!((o.x2 - 97.485_241_333_021_58).abs() < 1e-9);
        assert!(o.certificate);
        let q = o.scr_quantile.unwrap();
        assert!((q - 252.758_738_814_922).abs() < 1e-8, "{q}");
    }

    #[test]
    fn guarantee_dominates_for_large_rate() {
        let c = ContractParams {
            r_g: 10.0,
            ..ContractParams::default()
        };
        let z = compute_z(&MarketParams::default(), &c);
        assert!((z - 11.0).abs() < 1e-10);
    }

    #[test]
    fn zero_profit_sharing() {
        let c = ContractParams {
            gamma: 0.0,
            ..ContractParams::default()
        };
        assert_eq!(compute_z(&MarketParams::default(), &c), 1.0);
    }

    #[test]
    fn terminal_own_funds_are_the_share_value() {
        let m = AlmModel::reference();
        let st = ContractState {
            phi: 3.0,
            mr: 0.0,
            s: 120.0,
        };
        assert_eq!(m.own_funds(10, &st).unwrap(), 360.0);
        assert!(m.own_funds(11, &st).is_err());
    }

    #[test]
    fn loss_domain() {
        let m = AlmModel::reference();
        assert!(m.psi_loss(0.0).is_err());
        assert!(m.psi_loss(-1.0).is_err());
    }

    #[test]
    fn median_quantile() {
        let m = AlmModel::reference();
        let mk = &m.market;
        let x = mk.s0 * (mk.mu - 0.5 * mk.sigma * mk.sigma).exp();
        assert!((m.scr_reference(0.5).unwrap() - m.psi_loss(x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_parameters() {
        let bad = ContractParams {
            maturity: 1,
            ..ContractParams::default()
        };
        assert!(AlmModel::new(MarketParams::default(), bad).is_err());
        let bad = MarketParams {
            sigma: 0.0,
            ..MarketParams::default()
        };
        assert!(AlmModel::new(bad, ContractParams::default()).is_err());
    }
}
