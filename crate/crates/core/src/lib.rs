//! Nested, multi-level (MLMC) and weighted multi-level (ML2R) Monte Carlo
//! estimators of `E[f(E[F(X, U) | X])]`, with parameter optimization for an
//! outer-to-inner cost ratio `tau`, pilot calibration of the structural
//! constants, and a benchmark harness on a life-insurance loss model.
//!
//! Modules:
//!
//! - [`nested`]: problems, plans, the estimators, the empirical multi-level
//!   CDF and its quantile.
//! - [`weights`]: Richardson-Romberg level weights.
//! - [`optimizer`]: closed-form and optimized parameters, budget inversion,
//!   the closed-form nested inner size.
//! - [`calibration`]: pilot fits of `c1`, `c2`, `V1` and `sigma1^2`.
//! - [`alm`]: the asset-liability model, its closed-form oracles and the
//!   nested problem built on it.
//! - [`bench`]: configuration, benchmark and tau sweep drivers, CSV/JSON
//!   records, manifests.
//! - [`rng`]: counter-based per-path random streams.
//! - [`cli`]: the `nested-mlmc` command line.
//!
//! Runnable examples live in `examples/`: `alm_reference`, `plan_parameters`,
//! `cardano`, `weights`, `streams`, `custom_problem`,
//! `estimate_cdf_quantile`, `antithetic_variance`, `calibrate`, `benchmark`,
//! `tau_sweep`.

pub mod alm;
pub mod bench;
pub mod calibration;
pub mod cli;
pub mod error;
pub mod nested;
pub mod optimizer;
pub mod rng;
pub mod weights;

pub use error::{Error, Result};
