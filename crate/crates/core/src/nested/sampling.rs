//! Inner averages and the fine/coarse couplings of one level.

use crate::error::{Error, Result};
use crate::rng::PathStream;

use super::problem::{NestedProblem, PayoffTransform};

/// Sum of `F(x, U_k)` over inner draws `k = start .. start + count`.
pub fn inner_sum<P: NestedProblem>(
    problem: &P,
    x: &P::Outer,
    stream: &PathStream,
    start: u32,
    count: u32,
) -> Result<f64> {
    let mut s = 0.0;
    for k in start..start + count {
        let mut rng = stream.inner_rng(k);
        s += problem.sample_inner(x, &mut rng)?;
    }
    Ok(s)
}

/// `(1/K) sum_{k<K} F(x, U_k)` with the first `K` inner draws of the stream.
pub fn sample_inner_mean<P: NestedProblem>(
    problem: &P,
    x: &P::Outer,
    k: u32,
    stream: &PathStream,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("inner sample size must be at least 1"));
    }
    Ok(inner_sum(problem, x, stream, 0, k)? / k as f64)
}

/// Inner means backing one level with `2N` draws: the mean of the first and
/// the second half, and the mean of all draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelMeans {
    pub fine: f64,
    pub coarse: f64,
    pub coarse_alt: f64,
}

/// Draws `k2 = 2N` inner samples and returns the three inner means.
///
/// The fine mean is formed as the average of the two half means, so identity
/// payoffs cancel exactly in the antithetic difference.
pub fn level_means<P: NestedProblem>(
    problem: &P,
    x: &P::Outer,
    k2: u32,
    stream: &PathStream,
) -> Result<LevelMeans> {
    if k2 == 0 || !k2.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "level inner size must be even and positive, got {k2}"
        )));
    }
    let n = k2 / 2;
    let c1 = inner_sum(problem, x, stream, 0, n)? / n as f64;
    let c2 = inner_sum(problem, x, stream, n, n)? / n as f64;
    Ok(LevelMeans {
        fine: 0.5 * (c1 + c2),
        coarse: c1,
        coarse_alt: c2,
    })
}

/// Standard coupling: `(f(mean of 2N draws), f(mean of the first N))`.
pub fn sample_level_standard<P: NestedProblem>(
    problem: &P,
    x: &P::Outer,
    k2: u32,
    f: &PayoffTransform,
    stream: &PathStream,
) -> Result<(f64, f64)> {
    let m = level_means(problem, x, k2, stream)?;
    Ok((f.apply(m.fine), f.apply(m.coarse)))
}

/// Antithetic coupling: `(f(fine), f(first half), f(second half))`; the level
/// value is `fine - (coarse1 + coarse2) / 2`.
pub fn sample_level_antithetic<P: NestedProblem>(
    problem: &P,
    x: &P::Outer,
    k2: u32,
    f: &PayoffTransform,
    stream: &PathStream,
) -> Result<(f64, f64, f64)> {
    let m = level_means(problem, x, k2, stream)?;
    Ok((f.apply(m.fine), f.apply(m.coarse), f.apply(m.coarse_alt)))
}
