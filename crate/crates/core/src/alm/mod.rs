//! Life-insurance asset-liability benchmark with closed-form oracles.

mod model;
mod normal;
mod problem;

pub use model::{compute_z, AlmModel, AlmOracles, ContractParams, ContractState, MarketParams};
pub use normal::{norm_cdf, norm_inv, norm_pdf};
pub use problem::{make_nested_problem, AlmProblem};
