use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::nested::EstimatorKind;
use crate::optimizer::{
    invert_budget, plan_table1, plan_table2, PlanOutcome, PlanRule, StructuralConstants,
};

/// The five benchmarked estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorId {
    /// Standard nested Monte Carlo with `K` from the optimized rule (`R = 1`).
    Nested,
    Ml2rTable2,
    MlmcTable2,
    Ml2rTable1,
    MlmcTable1,
}

impl EstimatorId {
    pub fn all() -> Vec<Self> {
        vec![
            Self::Nested,
            Self::Ml2rTable2,
            Self::MlmcTable2,
            Self::Ml2rTable1,
            Self::MlmcTable1,
        ]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Nested => "nested",
            Self::Ml2rTable2 => "ml2r_table2",
            Self::MlmcTable2 => "mlmc_table2",
            Self::Ml2rTable1 => "ml2r_table1",
            Self::MlmcTable1 => "mlmc_table1",
        }
    }

    /// Stable index used for seed derivation.
    pub fn index(&self) -> u64 {
        match self {
            Self::Nested => 0,
            Self::Ml2rTable2 => 1,
            Self::MlmcTable2 => 2,
            Self::Ml2rTable1 => 3,
            Self::MlmcTable1 => 4,
        }
    }

    pub fn kind(&self) -> EstimatorKind {
        match self {
            Self::Nested => EstimatorKind::Nested,
            Self::Ml2rTable2 | Self::Ml2rTable1 => EstimatorKind::Ml2r,
            Self::MlmcTable2 | Self::MlmcTable1 => EstimatorKind::StandardMlmc,
        }
    }

    pub fn rule(&self) -> PlanRule {
        match self {
            Self::Ml2rTable1 | Self::MlmcTable1 => PlanRule::ClosedForm,
            _ => PlanRule::Optimized,
        }
    }

    /// Plan reaching precision `eps`.
    pub fn plan(&self, c: &StructuralConstants, eps: f64, k_floor: u64) -> Result<PlanOutcome> {
        plan_for_rule(self.rule(), self.kind(), c, eps, k_floor)
    }

    /// Tightest plan whose approximate cost fits `budget`.
    pub fn plan_for_budget(
        &self,
        c: &StructuralConstants,
        budget: f64,
        k_floor: u64,
    ) -> Result<PlanOutcome> {
        invert_budget(budget, |eps| self.plan(c, eps, k_floor))
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dispatches to the closed-form or optimized rule.
pub fn plan_for_rule(
    rule: PlanRule,
    kind: EstimatorKind,
    c: &StructuralConstants,
    eps: f64,
    k_floor: u64,
) -> Result<PlanOutcome> {
    match rule {
        PlanRule::ClosedForm => plan_table1(c, eps, kind, k_floor),
        PlanRule::Optimized => plan_table2(c, eps, kind, k_floor),
    }
}
