//! Empirical check of the antithetic variance reduction.
//!
//! For one level with `2N` inner draws, the standard and antithetic level
//! values differ by `(f(coarse') - f(coarse)) / 2`, which is conditionally
//! centred and uncorrelated with the antithetic value. Hence
//! `Var[dY^S] - Var[dY^A] = E[Var[Y_N | X]] / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::estimator::map_outer;
use super::problem::{NestedProblem, PayoffTransform};
use super::sampling::{inner_sum, level_means};

/// Both sides of the variance identity with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntitheticGain {
    pub n: u32,
    pub n_outer: u64,
    pub replicates: u32,
    pub var_standard: f64,
    pub var_antithetic: f64,
    /// `Var[dY^S] - Var[dY^A]`.
    pub d: f64,
    pub se_d: f64,
    /// `E[Var[Y_N | X]] / 2` from the conditional replicates.
    pub h: f64,
    pub se_h: f64,
}

impl AntitheticGain {
    /// `|d - h| <= z (se_d + se_h)`.
    pub fn consistent(&self, z: f64) -> bool {
        (self.d - self.h).abs() <= z * (self.se_d + self.se_h)
    }

    /// `d > z se_d`.
    pub fn positive(&self, z: f64) -> bool {
        self.d > z * self.se_d
    }
}

struct OuterRow {
    standard: f64,
    antithetic: f64,
    half_cond_var: f64,
}

fn mean_sd(v: impl Iterator<Item = f64> + Clone, n: f64) -> (f64, f64) {
    let m = v.clone().sum::<f64>() / n;
    let var = v.map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

/// Estimates both sides of the identity with `n_outer` outer draws.
///
/// Each outer draw uses `2n` inner draws for the level values and
/// `replicates` further independent blocks of `n` draws for the
/// conditional variance of `Y_N`.
pub fn antithetic_gain<P: NestedProblem>(
    problem: &P,
    f: &PayoffTransform,
    n: u32,
    n_outer: u64,
    replicates: u32,
    seed: u64,
) -> Result<AntitheticGain> {
    if n == 0 || n_outer < 2 || replicates < 2 {
        return Err(Error::invalid(
            "need n >= 1, at least two outer draws and two replicates",
        ));
    }
    if (2 + replicates as u64) * n as u64 >= u32::MAX as u64 {
        return Err(Error::invalid("inner draw index overflows the stream"));
    }
    let rows = map_outer(problem, seed, 1, n_outer, |x, s| {
        let m = level_means(problem, x, 2 * n, s)?;
        let (fine, c1, c2) = (f.apply(m.fine), f.apply(m.coarse), f.apply(m.coarse_alt));
        let mut reps = Vec::with_capacity(replicates as usize);
        for i in 0..replicates {
            let start = (2 + i) * n;
            reps.push(f.apply(inner_sum(problem, x, s, start, n)? / n as f64));
        }
        let (_, sd) = mean_sd(reps.iter().copied(), replicates as f64);
        Ok(OuterRow {
            standard: fine - c1,
            antithetic: fine - 0.5 * (c1 + c2),
            half_cond_var: 0.5 * sd * sd,
        })
    })?;
    let j = n_outer as f64;
    let (ms, ss) = mean_sd(rows.iter().map(|r| r.standard), j);
    let (ma, sa) = mean_sd(rows.iter().map(|r| r.antithetic), j);
    // Delta method: d is the mean of the centred squared differences.
    let w = rows
        .iter()
        .map(|r| ((r.standard - ms).powi(2) - (r.antithetic - ma).powi(2)) * j / (j - 1.0));
    let (d, sd_w) = mean_sd(w, j);
    let (h, sd_h) = mean_sd(rows.iter().map(|r| r.half_cond_var), j);
    Ok(AntitheticGain {
        n,
        n_outer,
        replicates,
        var_standard: ss * ss,
        var_antithetic: sa * sa,
        d,
        se_d: sd_w / j.sqrt(),
        h,
        se_h: sd_h / j.sqrt(),
    })
}
