//! Nested Monte Carlo and multi-level estimators.

mod antithetic;
mod empirical;
mod estimator;
mod plan;
mod problem;
mod sampling;

pub use antithetic::{antithetic_gain, AntitheticGain};
pub use empirical::{
    estimate_cdf_and_quantile, CdfQuantileEstimate, EmpiricalMlmcCdf, QuantileRoot, QuantileStatus,
};
pub use estimator::{estimate, level_stream, map_outer, EstimateResult, LevelStats};
pub use plan::{EstimatorKind, MlmcPlan};
pub use problem::{NestedProblem, PayoffTransform};
pub use sampling::{
    inner_sum, level_means, sample_inner_mean, sample_level_antithetic, sample_level_standard,
    LevelMeans,
};
