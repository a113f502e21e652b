//! Numerical classification and verification of h-MN-convexity.
//!
//! A positive function `f` is h-MN-convex when `f(M(t; x, y)) ≤ N(h(t); f(x), f(y))`
//! for the arithmetic, geometric or harmonic means `M` and `N`. Every check here is
//! sampled: a verdict says whether a counterexample was found on a deterministic plan.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod classes;
pub mod error;
pub mod funcs;
pub mod hfun;
pub mod jensen;
pub mod means;
pub mod pointwise;
pub mod transforms;
pub mod verdict;

pub use classes::ClassLabel;
pub use error::{Error, Result};
pub use funcs::{Interval, SamplePlan, ScalarFn};
pub use hfun::HFunction;
pub use means::{MeanKind, WeightVector};
pub use verdict::{PredicateVerdict, Status, Tolerance, Verdict};
