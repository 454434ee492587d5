use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::PathStream;

use super::plan::{EstimatorKind, MlmcPlan};
use super::problem::{NestedProblem, PayoffTransform};
use super::sampling::{level_means, sample_inner_mean, LevelMeans};

/// Summary statistics of one level's samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    /// 1-based level index.
    pub level: usize,
    pub n_outer: u64,
    pub inner_size: u64,
    pub weight: f64,
    pub mean: f64,
    /// Mean of the squared level values.
    pub second_moment: f64,
}

impl LevelStats {
    pub(crate) fn from_values(
        level: usize,
        inner_size: u64,
        weight: f64,
        values: &[f64],
    ) -> Result<Self> {
        let mut s = 0.0;
        let mut s2 = 0.0;
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    level,
                    index: i as u64,
                });
            }
            s += v;
            s2 += v * v;
        }
        let n = values.len() as f64;
        Ok(Self {
            level,
            n_outer: values.len() as u64,
            inner_size,
            weight,
            mean: s / n,
            second_moment: s2 / n,
        })
    }

    /// Biased sample variance of the level values.
    pub fn variance(&self) -> f64 {
        (self.second_moment - self.mean * self.mean).max(0.0)
    }
}

/// Output of one run of an estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub kind: EstimatorKind,
    pub estimate: f64,
    pub per_level: Vec<LevelStats>,
    /// `sum_r J_r (tau + K_r)` in inner-sample units.
    pub consumed_cost: f64,
    pub tau: f64,
    pub seed: u64,
}

impl EstimateResult {
    pub(crate) fn assemble(
        plan: &MlmcPlan,
        per_level: Vec<LevelStats>,
        tau: f64,
        seed: u64,
    ) -> Self {
        let estimate = per_level.iter().map(|l| l.weight * l.mean).sum();
        let consumed_cost = per_level
            .iter()
            .map(|l| l.n_outer as f64 * (tau + l.inner_size as f64))
            .sum();
        Self {
            kind: plan.kind,
            estimate,
            per_level,
            consumed_cost,
            tau,
            seed,
        }
    }
}

/// Level `level` (1-based) stream of outer sample `j`.
pub fn level_stream(seed: u64, level: usize, j: u64) -> PathStream {
    PathStream::new(seed, level as u8, j)
}

/// Evaluates `g` on every outer sample of a level, in index order.
///
/// The collection is indexed, so the output does not depend on how rayon
/// schedules the work.
pub fn map_outer<P, T, G>(
    problem: &P,
    seed: u64,
    level: usize,
    n_outer: u64,
    g: G,
) -> Result<Vec<T>>
where
    P: NestedProblem,
    T: Send,
    G: Fn(&P::Outer, &PathStream) -> Result<T> + Sync,
{
    (0..n_outer)
        .into_par_iter()
        .map(|j| {
            let stream = level_stream(seed, level, j);
            let x = problem.sample_outer(&mut stream.outer_rng());
            g(&x, &stream)
        })
        .collect()
}

/// First-level inner means `E_K(x_j)`, `j < n_outer`.
pub(crate) fn first_level_means<P: NestedProblem>(
    problem: &P,
    seed: u64,
    n_outer: u64,
    k: u64,
) -> Result<Vec<f64>> {
    map_outer(problem, seed, 1, n_outer, |x, s| {
        sample_inner_mean(problem, x, k as u32, s)
    })
}

/// Fine and coarse inner means of an upper level.
pub(crate) fn upper_level_means<P: NestedProblem>(
    problem: &P,
    seed: u64,
    level: usize,
    n_outer: u64,
    k: u64,
) -> Result<Vec<LevelMeans>> {
    map_outer(problem, seed, level, n_outer, |x, s| {
        level_means(problem, x, k as u32, s)
    })
}

/// Runs the general weighted multi-level estimator
/// `(1/J_1) sum Y_{K_1} + sum_{r>=2} (A_r/J_r) sum dY_{K_r}` with antithetic
/// upper levels.
///
/// The result is a pure function of `(problem, f, plan, seed)`.
pub fn estimate<P: NestedProblem>(
    problem: &P,
    f: &PayoffTransform,
    plan: &MlmcPlan,
    seed: u64,
) -> Result<EstimateResult> {
    plan.validate()?;
    let tau = problem.outer_cost_tau();
    let js = plan.outer_counts()?;
    let ks = plan.inner_sizes();
    let mut per_level = Vec::with_capacity(plan.levels);
    for r in 0..plan.levels {
        let level = r + 1;
        let values: Vec<f64> = if level == 1 {
            first_level_means(problem, seed, js[0], ks[0])?
                .into_iter()
                .map(|m| f.apply(m))
                .collect()
        } else {
            upper_level_means(problem, seed, level, js[r], ks[r])?
                .into_iter()
                .map(|m| f.apply(m.fine) - 0.5 * (f.apply(m.coarse) + f.apply(m.coarse_alt)))
                .collect()
        };
        per_level.push(LevelStats::from_values(
            level,
            ks[r],
            plan.level_weights[r],
            &values,
        )?);
    }
    Ok(EstimateResult::assemble(plan, per_level, tau, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamRng;

    /// `X ~ N(0, 1)`, `F(x, u) = x + u` with `U ~ N(0, 1)`.
    struct Gaussian;

    impl NestedProblem for Gaussian {
        type Outer = f64;
        fn sample_outer(&self, rng: &mut StreamRng) -> f64 {
            rng.normal()
        }
        fn sample_inner(&self, x: &f64, rng: &mut StreamRng) -> Result<f64> {
            Ok(x + rng.normal())
        }
        fn exact_conditional(&self, x: &f64) -> Option<f64> {
            Some(*x)
        }
        fn outer_cost_tau(&self) -> f64 {
            3.0
        }
    }

    struct Broken;

    impl NestedProblem for Broken {
        type Outer = u64;
        fn sample_outer(&self, rng: &mut StreamRng) -> u64 {
            rand::RngCore::next_u64(rng) % 50
        }
        fn sample_inner(&self, x: &u64, _: &mut StreamRng) -> Result<f64> {
            Ok(if *x == 0 { f64::NAN } else { 1.0 })
        }
        fn outer_cost_tau(&self) -> f64 {
            0.0
        }
    }

    #[test]
    fn cost_matches_closed_form() {
        let plan =
            MlmcPlan::new(EstimatorKind::Ml2r, 333.3, vec![0.5, 0.3, 0.2], 3.5, 1.0).unwrap();
        let res = estimate(&Gaussian, &PayoffTransform::Indicator(0.0), &plan, 5).unwrap();
        let expected = [0.5f64, 0.3, 0.2]
            .iter()
            .zip([4.0, 8.0, 16.0])
            .map(|(q, k)| (333.3 * q).ceil() * (3.0 + k))
            .sum::<f64>();
        assert_eq!(res.consumed_cost, expected);
        assert_eq!(res.per_level.len(), 3);
    }

    #[test]
    fn identity_upper_levels_vanish() {
        let plan = MlmcPlan::new(
            EstimatorKind::StandardMlmc,
            200.0,
            vec![0.5, 0.25, 0.25],
            2.0,
            1.0,
        )
        .unwrap();
        let res = estimate(&Gaussian, &PayoffTransform::Identity, &plan, 9).unwrap();
        for l in &res.per_level[1..] {
            assert_eq!(l.mean, 0.0);
            assert_eq!(l.second_moment, 0.0);
        }
    }

    #[test]
    fn non_finite_samples_abort() {
        let plan = MlmcPlan::nested(500, 2).unwrap();
        match estimate(&Broken, &PayoffTransform::Identity, &plan, 1) {
            Err(Error::NonFinite { level, .. }) => assert_eq!(level, 1),
            other => panic!("expected non-finite error, got {other:?}"),
        }
    }
}
