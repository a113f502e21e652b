//! Reduction of each class to plain h-convexity of a transformed function.

use serde::Serialize;

use crate::classes::{check_class, class_samples, verdict_over, ClassLabel};
use crate::error::{Error, Result};
use crate::funcs::{BinOp, Expr, Func, Interval, SamplePlan, ScalarFn};
use crate::hfun::HFunction;
use crate::means::MeanKind;
use crate::verdict::{Gap, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    SameAsSource,
    Flipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Wrapper {
    Id,
    Log,
    Reciprocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Reparam {
    Id,
    /// `u ↦ τ·e^{−u}`
    ExpDecay(f64),
    /// `u ↦ 1/u`
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformSpec {
    pub label: ClassLabel,
    pub tau: f64,
    pub target_direction: Direction,
    pub wrapper: Wrapper,
    pub reparam: Reparam,
}

impl TransformSpec {
    pub fn for_label(label: ClassLabel, tau: f64) -> Self {
        let (wrapper, target_direction) = match label.n {
            MeanKind::Arithmetic => (Wrapper::Id, Direction::SameAsSource),
            MeanKind::Geometric => (Wrapper::Log, Direction::SameAsSource),
            MeanKind::Harmonic => (Wrapper::Reciprocal, Direction::Flipped),
        };
        let reparam = match label.m {
            MeanKind::Arithmetic => Reparam::Id,
            MeanKind::Geometric => Reparam::ExpDecay(tau),
            MeanKind::Harmonic => Reparam::Inverse,
        };
        TransformSpec {
            label,
            tau,
            target_direction,
            wrapper,
            reparam,
        }
    }

    /// Image of a source point under the inverse reparametrization.
    pub fn to_target(&self, x: f64) -> f64 {
        match self.reparam {
            Reparam::Id => x,
            Reparam::ExpDecay(tau) => -(x / tau).ln(),
            Reparam::Inverse => 1.0 / x,
        }
    }

    /// Target domain for a source domain.
    pub fn target_domain(&self, d: &Interval) -> Result<Interval> {
        match self.reparam {
            Reparam::Id => Ok(*d),
            Reparam::ExpDecay(_) => {
                let lo = if d.hi.is_finite() {
                    self.to_target(d.hi)
                } else {
                    f64::NEG_INFINITY
                };
                let hi = if d.lo > 0.0 {
                    self.to_target(d.lo)
                } else {
                    f64::INFINITY
                };
                Interval::new(lo, hi)
            }
            Reparam::Inverse => {
                let lo = if d.hi.is_finite() { 1.0 / d.hi } else { 0.0 };
                let hi = if d.lo > 0.0 {
                    1.0 / d.lo
                } else {
                    f64::INFINITY
                };
                Interval::new(lo, hi)
            }
        }
    }
}

/// Default `τ`: the upper end of `f`'s domain.
pub fn default_tau(f: &ScalarFn) -> Result<f64> {
    if f.domain.hi.is_finite() {
        Ok(f.domain.hi)
    } else {
        Err(Error::Domain(
            "τ must be given when the domain is unbounded".into(),
        ))
    }
}

/// `g = wrapper ∘ f ∘ reparam` with the correspondence direction.
pub fn transform(label: ClassLabel, f: &ScalarFn, tau: f64) -> Result<(ScalarFn, Direction)> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("τ must be positive, got {tau}")));
    }
    let spec = TransformSpec::for_label(label, tau);
    let u = Expr::var('x');
    let inner = match spec.reparam {
        Reparam::Id => u,
        Reparam::ExpDecay(tau) => Expr::bin(
            BinOp::Mul,
            Expr::num(tau),
            Expr::call(Func::Exp, Expr::neg(u)),
        ),
        Reparam::Inverse => Expr::bin(BinOp::Div, Expr::num(1.0), u),
    };
    let body = f.to_expr().substitute(&inner);
    let body = match spec.wrapper {
        Wrapper::Id => body,
        Wrapper::Log => Expr::call(Func::Log, body),
        Wrapper::Reciprocal => Expr::bin(BinOp::Div, Expr::num(1.0), body),
    };
    let domain = spec.target_domain(&f.domain)?;
    Ok((ScalarFn::expression(body, domain), spec.target_direction))
}

/// Plain h-convexity gap of `g` at `(p, q, t)`.
pub fn h_convexity_gap(g: &ScalarFn, h: &HFunction, p: f64, q: f64, t: f64) -> Result<Gap> {
    let lhs = g.eval(t * p + (1.0 - t) * q)?;
    let rhs = h.weight(t)? * g.eval(p)? + h.weight(1.0 - t)? * g.eval(q)?;
    Ok(Gap::new(lhs, rhs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub label: ClassLabel,
    pub tau: f64,
    pub direct: Verdict,
    /// Verdict on `g`, read back in the source direction.
    pub transformed: Verdict,
    pub agree: bool,
}

/// Compare the direct class verdict with the transformed h-convexity verdict
/// on corresponding sample triples.
pub fn cross_check(
    label: ClassLabel,
    f: &ScalarFn,
    h: &HFunction,
    tau: f64,
    plan: &SamplePlan,
) -> Result<CrossCheck> {
    let direct = check_class(label, f, h, plan)?;
    let (g, dir) = transform(label, f, tau)?;
    let spec = TransformSpec::for_label(label, tau);
    let pts = class_samples(&f.domain, h, plan);
    let harmonic = label.m == MeanKind::Harmonic;
    let mapped = verdict_over(format!("{label} transformed"), &pts, plan, |s| {
        let (x, y, t) = (s[0], s[1], s[2]);
        // harmonic rows pair (1/y, 1/x) so that weight t lands on the same point
        let (p, q) = if harmonic {
            (spec.to_target(y), spec.to_target(x))
        } else {
            (spec.to_target(x), spec.to_target(y))
        };
        if spec.wrapper != Wrapper::Id {
            // positivity of f is a standing hypothesis of the source class
            f.eval_positive(x)?;
            f.eval_positive(y)?;
        }
        h_convexity_gap(&g, h, p, q, t).map(Some)
    })?;
    let transformed = match dir {
        Direction::SameAsSource => mapped,
        Direction::Flipped => mapped.flipped(),
    };
    let agree = direct.status == transformed.status;
    Ok(CrossCheck {
        label,
        tau,
        direct,
        transformed,
        agree,
    })
}
