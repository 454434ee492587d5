use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::rng::StreamRng;

/// A nested expectation problem `E[f(E[F(X, U) | X])]`.
///
/// Implementations provide the outer draw `X`, conditionally i.i.d. inner
/// draws `F(x, U)` given `x`, and the relative cost `tau` of one outer draw
/// measured in inner draws.
pub trait NestedProblem: Sync {
    type Outer: Send + Sync;

    fn sample_outer(&self, rng: &mut StreamRng) -> Self::Outer;

    fn sample_inner(&self, outer: &Self::Outer, rng: &mut StreamRng) -> Result<f64>;

    /// `psi(x) = E[F(x, U)]` when it is known in closed form.
    fn exact_conditional(&self, _outer: &Self::Outer) -> Option<f64> {
        None
    }

    fn outer_cost_tau(&self) -> f64;
}

impl<P: NestedProblem + ?Sized> NestedProblem for &P {
    type Outer = P::Outer;

    fn sample_outer(&self, rng: &mut StreamRng) -> Self::Outer {
        (**self).sample_outer(rng)
    }

    fn sample_inner(&self, outer: &Self::Outer, rng: &mut StreamRng) -> Result<f64> {
        (**self).sample_inner(outer, rng)
    }

    fn exact_conditional(&self, outer: &Self::Outer) -> Option<f64> {
        (**self).exact_conditional(outer)
    }

    fn outer_cost_tau(&self) -> f64 {
        (**self).outer_cost_tau()
    }
}

/// The function applied to inner means.
#[derive(Clone)]
pub enum PayoffTransform {
    /// `v -> 1{v <= threshold}`.
    Indicator(f64),
    Identity,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl PayoffTransform {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        PayoffTransform::Custom(Arc::new(f))
    }

    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        match self {
            PayoffTransform::Indicator(u) => {
                if v <= *u {
                    1.0
                } else {
                    0.0
                }
            }
            PayoffTransform::Identity => v,
            PayoffTransform::Custom(h) => h(v),
        }
    }
}

impl fmt::Debug for PayoffTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PayoffTransform::Indicator(u) => write!(f, "Indicator({u})"),
            PayoffTransform::Identity => write!(f, "Identity"),
            PayoffTransform::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}
