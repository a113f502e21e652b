//! Weight functions `h` and their algebraic hypotheses.

use serde::{Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};
use crate::funcs::plan::spaced;
use crate::funcs::{parse_expr, BinOp, Expr, Interval, SamplePlan};
use crate::verdict::{sweep, Gap, PredicateVerdict};

#[derive(Debug, Clone, PartialEq)]
pub enum HKind {
    Identity,
    Power(f64),
    ConstantOne,
    Reciprocal,
    Expression(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HFunction {
    pub kind: HKind,
    pub domain: Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityBound {
    AboveId,
    BelowId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumBound {
    AtMost,
    AtLeast,
}

impl HFunction {
    pub fn new(kind: HKind) -> Self {
        HFunction {
            kind,
            domain: Interval::POSITIVE,
        }
    }

    pub fn identity() -> Self {
        HFunction::new(HKind::Identity)
    }

    pub fn power(r: f64) -> Self {
        HFunction::new(HKind::Power(r))
    }

    pub fn expression(e: Expr) -> Self {
        HFunction::new(HKind::Expression(e.with_var('t')))
    }

    pub fn on(mut self, domain: Interval) -> Result<Self> {
        if !(domain.lo <= 0.0 && domain.hi >= 1.0) {
            return Err(Error::Domain(format!(
                "h domain ({}, {}) must contain (0, 1)",
                domain.lo, domain.hi
            )));
        }
        self.domain = domain;
        Ok(self)
    }

    /// Accepts `id`, `pow:<r>`, `one`, `recip` and `expr:<text>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let kind = match spec {
            "id" => HKind::Identity,
            "one" => HKind::ConstantOne,
            "recip" => HKind::Reciprocal,
            _ => {
                if let Some(r) = spec.strip_prefix("pow:") {
                    let r: f64 = r
                        .trim()
                        .parse()
                        .map_err(|_| Error::Spec(format!("bad exponent in `{spec}`")))?;
                    if !r.is_finite() {
                        return Err(Error::Spec(format!("bad exponent in `{spec}`")));
                    }
                    HKind::Power(r)
                } else if let Some(text) = spec.strip_prefix("expr:") {
                    HKind::Expression(parse_expr(text)?.with_var('t'))
                } else {
                    return Err(Error::Spec(format!("unknown h `{spec}`")));
                }
            }
        };
        Ok(HFunction::new(kind))
    }

    fn raw(&self, t: f64) -> Result<f64> {
        let v = match &self.kind {
            HKind::Identity => t,
            HKind::Power(r) => t.powf(*r),
            HKind::ConstantOne => 1.0,
            HKind::Reciprocal => 1.0 / t,
            HKind::Expression(e) => e.eval(t)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("h({t}) is not finite")))
        }
    }

    /// `h(t)` for `t` in the open domain; the value must be positive.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !self.domain.contains_open(t) {
            return Err(Error::Domain(format!(
                "{t} outside h domain ({}, {})",
                self.domain.lo, self.domain.hi
            )));
        }
        let v = self.raw(t)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::NonPositiveValue { at: t, value: v })
        }
    }

    /// `h(t)` for weights in `[0, 1]`; endpoints of the domain are allowed and
    /// may yield zero (e.g. `t^r` at 0).
    pub fn weight(&self, t: f64) -> Result<f64> {
        if self.domain.contains_open(t) {
            return self.eval(t);
        }
        if !self.domain.contains_closed(t) {
            return Err(Error::Domain(format!(
                "{t} outside h domain ({}, {})",
                self.domain.lo, self.domain.hi
            )));
        }
        let v = self.raw(t)?;
        if v < 0.0 {
            return Err(Error::NonPositiveValue { at: t, value: v });
        }
        Ok(v)
    }

    /// Whether `weight` is defined at both 0 and 1.
    pub fn admits_endpoints(&self) -> bool {
        self.weight(0.0).is_ok() && self.weight(1.0).is_ok()
    }

    pub fn to_expr(&self) -> Expr {
        let t = Expr::var('t');
        match &self.kind {
            HKind::Identity => t,
            HKind::Power(r) => Expr::bin(BinOp::Pow, t, Expr::num(*r)),
            HKind::ConstantOne => Expr::num(1.0),
            HKind::Reciprocal => Expr::bin(BinOp::Div, Expr::num(1.0), t),
            HKind::Expression(e) => e.clone(),
        }
    }

    /// `c·h`.
    pub fn scaled(&self, c: f64) -> HFunction {
        if c == 1.0 {
            return self.clone();
        }
        HFunction {
            kind: HKind::Expression(Expr::bin(BinOp::Mul, Expr::num(c), self.to_expr())),
            domain: self.domain,
        }
    }

    /// Pointwise maximum on the common domain.
    pub fn max(&self, other: &HFunction) -> Result<HFunction> {
        self.pointwise(BinOp::Max, other)
    }

    /// Pointwise minimum on the common domain.
    pub fn min(&self, other: &HFunction) -> Result<HFunction> {
        self.pointwise(BinOp::Min, other)
    }

    fn pointwise(&self, op: BinOp, other: &HFunction) -> Result<HFunction> {
        if self == other {
            return Ok(self.clone());
        }
        Ok(HFunction {
            kind: HKind::Expression(Expr::bin(op, self.to_expr(), other.to_expr())),
            domain: self.domain.intersect(&other.domain)?,
        })
    }

    pub fn spec(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for HFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            HKind::Identity => write!(f, "id"),
            HKind::Power(r) => write!(f, "pow:{r}"),
            HKind::ConstantOne => write!(f, "one"),
            HKind::Reciprocal => write!(f, "recip"),
            HKind::Expression(e) => write!(f, "expr:{e}"),
        }
    }
}

impl Serialize for HFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `eval_h` in free-function form.
pub fn eval_h(h: &HFunction, t: f64) -> Result<f64> {
    h.eval(t)
}

/// `outer ∘ inner`, defined on `inner`'s domain.
pub fn compose_h(outer: &HFunction, inner: &HFunction) -> Result<HFunction> {
    let plan = SamplePlan::default();
    let (a, b) = plan.shrink(&inner.domain);
    for t in spaced(a, b, 256, a > 0.0) {
        let v = inner.eval(t)?;
        if !outer.domain.contains_open(v) {
            return Err(Error::Domain(format!(
                "inner h maps {t} to {v}, outside outer domain ({}, {})",
                outer.domain.lo, outer.domain.hi
            )));
        }
    }
    let kind = match (&outer.kind, &inner.kind) {
        (HKind::Identity, _) => inner.kind.clone(),
        (_, HKind::Identity) => outer.kind.clone(),
        (HKind::Power(r1), HKind::Power(r2)) => HKind::Power(r1 * r2),
        _ => HKind::Expression(outer.to_expr().substitute(&inner.to_expr())),
    };
    Ok(HFunction {
        kind,
        domain: inner.domain,
    })
}

/// Sample points of the open domain intersected with `(0, cap)`.
fn axis(h: &HFunction, plan: &SamplePlan, within: &Interval) -> Result<Vec<f64>> {
    let d = h.domain.intersect(within)?;
    let mut pts = plan.point_axis(&d);
    let mut rng = plan.rng();
    pts.extend((0..plan.random_count).map(|_| plan.random_point(&d, &mut rng)));
    Ok(pts)
}

fn pairs(h: &HFunction, plan: &SamplePlan) -> Result<Vec<[f64; 2]>> {
    let d = h.domain.intersect(&Interval::POSITIVE)?;
    let ax = plan.point_axis(&d);
    let mut out: Vec<[f64; 2]> = ax
        .iter()
        .flat_map(|&x| ax.iter().map(move |&y| [x, y]))
        .collect();
    let mut rng = plan.rng();
    for _ in 0..plan.random_count {
        let x = plan.random_point(&d, &mut rng);
        let y = plan.random_point(&d, &mut rng);
        out.push([x, y]);
    }
    Ok(out)
}

fn multiplicative(h: &HFunction, plan: &SamplePlan, super_: bool) -> Result<PredicateVerdict> {
    let pts = pairs(h, plan)?;
    let s = sweep(&pts, plan.tol, |p| {
        let (x, y) = (p[0], p[1]);
        if !h.domain.contains_open(x * y) {
            return Ok(None);
        }
        let (hxy, prod) = (h.eval(x * y)?, h.eval(x)? * h.eval(y)?);
        Ok(Some(if super_ {
            Gap::new(prod, hxy)
        } else {
            Gap::new(hxy, prod)
        }))
    })?;
    let name = if super_ {
        "supermultiplicative"
    } else {
        "submultiplicative"
    };
    Ok(s.into_predicate(name))
}

/// `h(xy) ≥ h(x)h(y)` on sampled pairs.
pub fn check_supermultiplicative(h: &HFunction, plan: &SamplePlan) -> Result<PredicateVerdict> {
    multiplicative(h, plan, true)
}

/// `h(xy) ≤ h(x)h(y)` on sampled pairs.
pub fn check_submultiplicative(h: &HFunction, plan: &SamplePlan) -> Result<PredicateVerdict> {
    multiplicative(h, plan, false)
}

pub fn check_dominates_identity(
    h: &HFunction,
    direction: IdentityBound,
    plan: &SamplePlan,
) -> Result<PredicateVerdict> {
    let pts: Vec<[f64; 1]> = axis(h, plan, &Interval::UNIT)?
        .into_iter()
        .map(|t| [t])
        .collect();
    let s = sweep(&pts, plan.tol, |p| {
        let (t, v) = (p[0], h.eval(p[0])?);
        Ok(Some(match direction {
            IdentityBound::AboveId => Gap::new(t, v),
            IdentityBound::BelowId => Gap::new(v, t),
        }))
    })?;
    Ok(s.into_predicate(match direction {
        IdentityBound::AboveId => "h(t) >= t",
        IdentityBound::BelowId => "h(t) <= t",
    }))
}

/// Values below this count as vanishing in the control-function test.
pub const VANISH_THRESHOLD: f64 = 1e-6;

/// Nondecreasing on a sequence `δ → 0⁺` with sampled infimum near zero.
pub fn check_control_function(h: &HFunction, plan: &SamplePlan) -> Result<PredicateVerdict> {
    let lo = h.domain.lo.max(1e-300);
    let hi = h.domain.hi.min(1.0);
    if !(lo < hi) {
        return Err(Error::Domain("h domain does not reach below 1".into()));
    }
    let n = plan.grid_per_axis.max(2) * 4;
    let mut deltas = spaced(lo, hi, n + 2, true);
    deltas.remove(0);
    deltas.pop();
    let values = deltas
        .iter()
        .map(|&d| match h.eval(d) {
            // t^r underflows near the smallest deltas
            Err(Error::NonPositiveValue { value: 0.0, .. }) => Ok(0.0),
            r => r,
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for i in 1..values.len() {
        let (a, b) = (values[i - 1], values[i]);
        let margin = b - a + plan.tol.allowance(a, b);
        if margin < worst {
            worst = margin;
            if margin < 0.0 {
                witness = Some(vec![deltas[i - 1], deltas[i]]);
            }
        }
    }
    let inf = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut v = PredicateVerdict {
        predicate: "control function".into(),
        status: crate::verdict::PredicateStatus::Holds,
        witness: None,
        reason: None,
        samples_checked: values.len(),
        worst_margin: worst.min(VANISH_THRESHOLD - inf),
        details: Default::default(),
    };
    v.details.insert("sampled_infimum".into(), inf);
    v.details.insert("smallest_delta".into(), deltas[0]);
    if let Some(w) = witness {
        v.status = crate::verdict::PredicateStatus::FailsAt;
        v.witness = Some(w);
        v.reason = Some("h decreases".into());
    } else if inf > VANISH_THRESHOLD {
        v.status = crate::verdict::PredicateStatus::FailsAt;
        v.witness = Some(vec![deltas[0]]);
        v.reason = Some(format!("sampled infimum {inf} does not vanish"));
    }
    Ok(v)
}

/// `h(t) + h(1 − t)` against `c` on `(0, 1)`.
pub fn check_symmetric_sum_bound(
    h: &HFunction,
    c: f64,
    direction: SumBound,
    plan: &SamplePlan,
) -> Result<PredicateVerdict> {
    let pts: Vec<[f64; 1]> = axis(h, plan, &Interval::UNIT)?
        .into_iter()
        .map(|t| [t])
        .collect();
    let s = sweep(&pts, plan.tol, |p| {
        let sum = h.eval(p[0])? + h.eval(1.0 - p[0])?;
        Ok(Some(match direction {
            SumBound::AtMost => Gap::new(sum, c),
            SumBound::AtLeast => Gap::new(c, sum),
        }))
    })?;
    Ok(s.into_predicate(match direction {
        SumBound::AtMost => format!("h(t) + h(1-t) <= {c}"),
        SumBound::AtLeast => format!("h(t) + h(1-t) >= {c}"),
    }))
}

/// Nondecreasing on `(0, 1)` at grid resolution.
pub fn check_nondecreasing(h: &HFunction, plan: &SamplePlan) -> Result<PredicateVerdict> {
    let d = h.domain.intersect(&Interval::UNIT)?;
    let mut ts = plan.point_axis(&d);
    let mut rng = plan.rng();
    ts.extend((0..plan.random_count).map(|_| plan.random_point(&d, &mut rng)));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let pts: Vec<[f64; 2]> = ts.windows(2).map(|w| [w[0], w[1]]).collect();
    let s = sweep(&pts, plan.tol, |p| {
        Ok(Some(Gap::new(h.eval(p[0])?, h.eval(p[1])?)))
    })?;
    Ok(s.into_predicate("nondecreasing"))
}
