//! Interval estimates for replicated errors.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};

/// Mean squared error over `M` replications with a chi-square interval.
///
/// `(M - 1) MSE / sigma^2` is treated as chi-square with `M - 1` degrees of
/// freedom; the RMSE bounds are the square roots of the MSE bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub replications: usize,
    pub mean: f64,
    pub bias: f64,
    pub mse: f64,
    pub rmse: f64,
    pub rmse_low: f64,
    pub rmse_high: f64,
}

pub const RMSE_CI_METHOD: &str =
    "95% chi-square interval on the mean squared error with M-1 degrees of freedom";

pub fn error_summary(values: &[f64], reference: f64, confidence: f64) -> Result<ErrorSummary> {
    let m = values.len();
    if m < 2 {
        return Err(Error::invalid("at least two replications are needed"));
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    let mse = values.iter().map(|v| (v - reference).powi(2)).sum::<f64>() / m as f64;
    let dof = (m - 1) as f64;
    let chi = ChiSquared::new(dof).map_err(|e| Error::Numerical(e.to_string()))?;
    let a = 1.0 - confidence;
    let lo = dof * mse / chi.inverse_cdf(1.0 - a / 2.0);
    let hi = dof * mse / chi.inverse_cdf(a / 2.0);
    Ok(ErrorSummary {
        replications: m,
        mean,
        bias: mean - reference,
        mse,
        rmse: mse.sqrt(),
        rmse_low: lo.sqrt(),
        rmse_high: hi.sqrt(),
    })
}

/// One-sided comparison of two MSEs with an F test on their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseComparison {
    /// `MSE_a / MSE_b`.
    pub ratio: f64,
    /// `P(F >= ratio)` under equal MSEs; small values mean `a` is worse.
    pub p_worse: f64,
    /// `P(F <= ratio)`; small values mean `a` is better.
    pub p_better: f64,
}

impl MseComparison {
    /// `a` is not significantly worse than `b` at the given level.
    pub fn not_worse(&self, confidence: f64) -> bool {
        self.p_worse > 1.0 - confidence
    }

    pub fn significantly_better(&self, confidence: f64) -> bool {
        self.p_better < 1.0 - confidence
    }
}

pub fn compare_mse(a: &ErrorSummary, b: &ErrorSummary) -> Result<MseComparison> {
    let f = fisher(a.replications, b.replications)?;
    let ratio = if b.mse > 0.0 {
        a.mse / b.mse
    } else {
        f64::INFINITY
    };
    Ok(MseComparison {
        ratio,
        p_worse: 1.0 - f.cdf(ratio),
        p_better: f.cdf(ratio),
    })
}

fn fisher(ma: usize, mb: usize) -> Result<FisherSnedecor> {
    FisherSnedecor::new((ma - 1) as f64, (mb - 1) as f64)
        .map_err(|e| Error::Numerical(e.to_string()))
}

/// MSE ratio `mse_num / mse_den` with an F-based interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioInterval {
    pub value: f64,
    pub low: f64,
    pub high: f64,
}

pub fn mse_ratio_interval(
    num: &ErrorSummary,
    den: &ErrorSummary,
    confidence: f64,
) -> Result<RatioInterval> {
    let f = fisher(num.replications, den.replications)?;
    let a = 1.0 - confidence;
    let value = num.mse / den.mse;
    Ok(RatioInterval {
        value,
        low: value / f.inverse_cdf(1.0 - a / 2.0),
        high: value / f.inverse_cdf(a / 2.0),
    })
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (average ranks for ties) and the one-sided
/// p-value of `rho > 0` from the t approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spearman {
    pub rho: f64,
    pub p_positive: f64,
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<Spearman> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::invalid(
            "spearman needs two samples of equal length >= 3",
        ));
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    let rho = if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    };
    let p_positive = if rho >= 1.0 {
        0.0
    } else {
        let t = rho * ((n - 2.0) / (1.0 - rho * rho)).sqrt();
        let st = StudentsT::new(0.0, 1.0, n - 2.0).map_err(|e| Error::Numerical(e.to_string()))?;
        1.0 - st.cdf(t)
    };
    Ok(Spearman { rho, p_positive })
}
