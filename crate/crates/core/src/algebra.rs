//! Closure, product and composition rules, and the boundary-value
//! functional inequalities over the simplex `α + β ≤ 1`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classes::{check_class, verdict_over, ClassLabel};
use crate::error::{Error, Result};
use crate::funcs::plan::spaced;
use crate::funcs::{BinOp, Interval, SamplePlan, ScalarFn};
use crate::hfun::{
    check_submultiplicative, check_supermultiplicative, check_symmetric_sum_bound, compose_h,
    HFunction, SumBound,
};
use crate::means::MeanKind;
use crate::verdict::{sweep, Gap, PredicateVerdict, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ordering {
    SimilarlyOrdered,
    OppositelyOrdered,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingRelation {
    pub relation: Ordering,
    /// For `Neither`, the pair that most violates similar ordering.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<[f64; 2]>,
}

fn pair_samples(d: &Interval, plan: &SamplePlan) -> Vec<[f64; 2]> {
    let xs = plan.point_axis(d);
    let mut out: Vec<[f64; 2]> = xs
        .iter()
        .flat_map(|&x| xs.iter().map(move |&y| [x, y]))
        .collect();
    let mut rng = plan.rng();
    for _ in 0..plan.random_count {
        out.push([
            plan.random_point(d, &mut rng),
            plan.random_point(d, &mut rng),
        ]);
    }
    out
}

struct OrderingFlags {
    similar: bool,
    opposite: bool,
    witness: Option<[f64; 2]>,
}

fn ordering_flags(f: &ScalarFn, g: &ScalarFn, plan: &SamplePlan) -> Result<OrderingFlags> {
    plan.validate()?;
    let d = f.domain.intersect(&g.domain)?;
    let pts = pair_samples(&d, plan);
    let s = sweep(&pts, plan.tol, |p| {
        let (fx, fy, gx, gy) = (f.eval(p[0])?, f.eval(p[1])?, g.eval(p[0])?, g.eval(p[1])?);
        Ok(Some(Gap::new(fx * gy + gx * fy, fx * gx + fy * gy)))
    })?;
    Ok(OrderingFlags {
        similar: s.convex_ok,
        opposite: s.concave_ok,
        witness: s
            .min
            .filter(|_| !s.convex_ok)
            .map(|w| [w.point[0], w.point[1]]),
    })
}

/// Sign of `(f(x) − f(y))(g(x) − g(y))` over sampled pairs, in the form
/// `f(x)g(x) + f(y)g(y) ≥ f(x)g(y) + g(x)f(y)`. A pair that is both (one
/// function constant) reads as similarly ordered.
pub fn check_ordering(f: &ScalarFn, g: &ScalarFn, plan: &SamplePlan) -> Result<OrderingRelation> {
    let o = ordering_flags(f, g, plan)?;
    Ok(match (o.similar, o.opposite) {
        (true, _) => OrderingRelation {
            relation: Ordering::SimilarlyOrdered,
            witness: None,
        },
        (false, true) => OrderingRelation {
            relation: Ordering::OppositelyOrdered,
            witness: None,
        },
        (false, false) => OrderingRelation {
            relation: Ordering::Neither,
            witness: o.witness,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClosureOp {
    Sum,
    Scale(f64),
    Max,
}

/// Class verdict of `f + g`, `λf` or `max{f, g}` after confirming that the
/// operands are themselves convex for `(label, h)`.
pub fn closure_check(
    op: ClosureOp,
    f: &ScalarFn,
    g: &ScalarFn,
    label: ClassLabel,
    h: &HFunction,
    plan: &SamplePlan,
) -> Result<Verdict> {
    let name = format!("{label} closure");
    if !check_class(label, f, h, plan)?.convex_supported() {
        return Ok(Verdict::indeterminate(
            name,
            format!("hypothesis failed: f is not {label}-convex"),
        ));
    }
    let combined = match op {
        ClosureOp::Scale(l) => {
            if !(l > 0.0) {
                return Err(Error::Spec(format!(
                    "scale factor must be positive, got {l}"
                )));
            }
            f.scaled(l)
        }
        ClosureOp::Sum | ClosureOp::Max => {
            if !check_class(label, g, h, plan)?.convex_supported() {
                return Ok(Verdict::indeterminate(
                    name,
                    format!("hypothesis failed: g is not {label}-convex"),
                ));
            }
            f.combine(
                if op == ClosureOp::Sum {
                    BinOp::Add
                } else {
                    BinOp::Max
                },
                g,
            )?
        }
    };
    let mut v = check_class(label, &combined, h, plan)?;
    v.label = name;
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Convex,
    Concave,
}

/// Ordering, envelope and sum-bound hypotheses of the product rule for the
/// value-side mean `n`.
fn product_bundle(n: MeanKind, direction: Direction) -> (Option<Ordering>, bool, SumBound) {
    use Direction::*;
    use MeanKind::*;
    match (n, direction) {
        (Arithmetic, Convex) => (Some(Ordering::SimilarlyOrdered), true, SumBound::AtMost),
        (Arithmetic, Concave) => (Some(Ordering::OppositelyOrdered), false, SumBound::AtLeast),
        (Geometric, Convex) => (None, true, SumBound::AtMost),
        (Geometric, Concave) => (None, false, SumBound::AtLeast),
        (Harmonic, Convex) => (Some(Ordering::OppositelyOrdered), false, SumBound::AtLeast),
        (Harmonic, Concave) => (Some(Ordering::SimilarlyOrdered), true, SumBound::AtMost),
    }
}

fn direction_holds(v: &Verdict, direction: Direction) -> bool {
    match direction {
        Direction::Convex => v.convex_supported(),
        Direction::Concave => v.concave_supported(),
    }
}

/// Verdict of `fg` under `(m_side, n_side)` with weight `c·h`, where `h` is
/// the pointwise max (or min) of `h1`, `h2` as the rule requires. Any failed
/// hypothesis yields `Indeterminate("hypothesis failed: …")`.
#[allow(clippy::too_many_arguments)]
pub fn product_rule(
    f: &ScalarFn,
    g: &ScalarFn,
    n_side: MeanKind,
    m_side: MeanKind,
    h1: &HFunction,
    h2: &HFunction,
    c: f64,
    direction: Direction,
    plan: &SamplePlan,
) -> Result<Verdict> {
    if !(c > 0.0) {
        return Err(Error::Spec(format!("c must be positive, got {c}")));
    }
    let label = ClassLabel::new(m_side, n_side);
    let name = format!("{label} product");
    let fail = |what: String| {
        Ok(Verdict::indeterminate(
            name.clone(),
            format!("hypothesis failed: {what}"),
        ))
    };
    let (ordering, use_max, bound) = product_bundle(n_side, direction);
    if let Some(want) = ordering {
        let o = ordering_flags(f, g, plan)?;
        let ok = match want {
            Ordering::SimilarlyOrdered => o.similar,
            _ => o.opposite,
        };
        if !ok {
            return fail(format!("f and g are not {want:?}"));
        }
    }
    let h = if use_max { h1.max(h2)? } else { h1.min(h2)? };
    let sum = check_symmetric_sum_bound(&h, c, bound, plan)?;
    if !sum.holds() {
        return fail(sum.predicate);
    }
    let word = match direction {
        Direction::Convex => "convex",
        Direction::Concave => "concave",
    };
    if !direction_holds(&check_class(label, f, h1, plan)?, direction) {
        return fail(format!("f is not {label}-{word} under h1"));
    }
    if !direction_holds(&check_class(label, g, h2, plan)?, direction) {
        return fail(format!("g is not {label}-{word} under h2"));
    }
    let fg = f.combine(BinOp::Mul, g)?;
    let mut v = check_class(label, &fg, &h.scaled(c), plan)?;
    v.label = name;
    Ok(v)
}

/// `f` is `K_tN`, `g` is `M_tK` ⇒ `f∘g` is `M_tN`.
pub fn compose_rule(f_label: ClassLabel, g_label: ClassLabel) -> Option<ClassLabel> {
    (g_label.n == f_label.m).then(|| ClassLabel::new(g_label.m, f_label.n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionRule {
    pub f_label: ClassLabel,
    pub g_label: ClassLabel,
    pub result: ClassLabel,
    pub requires: String,
}

/// The 27 populated rows, grouped by result label.
pub fn composition_table() -> Vec<CompositionRule> {
    let mut out = Vec::with_capacity(27);
    for result in ClassLabel::all() {
        for k in MeanKind::ALL {
            let f_label = ClassLabel::new(k, result.n);
            let g_label = ClassLabel::new(result.m, k);
            out.push(CompositionRule {
                f_label,
                g_label,
                result,
                requires: "f increasing".into(),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
    /// Blocking hypotheses turn the verdict Indeterminate when they fail.
    pub blocking: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionReport {
    pub f_label: ClassLabel,
    pub g_label: ClassLabel,
    pub rule: Option<ClassLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<HFunction>,
    pub hypotheses: Vec<Hypothesis>,
    pub verdict: Verdict,
}

/// Boundary value required of `f` by the AG/GA/GG composition rules.
fn composition_boundary(f_label: ClassLabel, g_label: ClassLabel) -> Option<(f64, f64)> {
    use MeanKind::*;
    match ((f_label.m, f_label.n), (g_label.m, g_label.n)) {
        ((Geometric, Arithmetic), (Arithmetic, Geometric)) => Some((1.0, 0.0)),
        ((Arithmetic, Geometric), (Geometric, Arithmetic)) => Some((0.0, 1.0)),
        ((Geometric, Geometric), (Geometric, Geometric)) => Some((1.0, 1.0)),
        _ => None,
    }
}

/// `f` at `at`, clamped into the shrunk closure of its domain.
fn boundary_value(f: &ScalarFn, at: f64, plan: &SamplePlan) -> (f64, Result<f64>) {
    let p = if f.domain.contains_open(at) {
        at
    } else {
        let (a, b) = plan.shrink(&f.domain);
        at.clamp(a, b)
    };
    (p, f.eval(p))
}

const BOUNDARY_TOL: f64 = 1e-4;

/// Numeric check of the composition table: `f∘g` under the composed label with
/// weight `h1∘h2`. Monotonicity of `f` and class membership of `f` and `g` are
/// blocking; the sum bound on `h2`, boundary values and multiplicativity of
/// `h1` are reported only.
pub fn verify_composition(
    f: &ScalarFn,
    g: &ScalarFn,
    f_label: ClassLabel,
    g_label: ClassLabel,
    h1: &HFunction,
    h2: &HFunction,
    plan: &SamplePlan,
) -> Result<CompositionReport> {
    plan.validate()?;
    let mut report = CompositionReport {
        f_label,
        g_label,
        rule: compose_rule(f_label, g_label),
        weight: None,
        hypotheses: Vec::new(),
        verdict: Verdict::indeterminate(format!("{f_label}∘{g_label}"), "no rule"),
    };
    let Some(rule) = report.rule else {
        return Ok(report);
    };
    report.verdict.label = rule.to_string();

    let mut xs = plan.point_axis(&g.domain);
    let mut rng = plan.rng();
    xs.extend((0..plan.random_count).map(|_| plan.random_point(&g.domain, &mut rng)));
    for x in xs {
        let v = g.eval(x)?;
        if !f.domain.contains_closed(v) {
            return Err(Error::RangeMismatch(format!(
                "g({x}) = {v} lies outside f's domain ({}, {})",
                f.domain.lo, f.domain.hi
            )));
        }
    }

    let weight = compose_h(h1, h2)?;
    report.weight = Some(weight.clone());
    let mut push = |name: String, holds: bool, blocking: bool, detail: Option<String>| {
        report.hypotheses.push(Hypothesis {
            name,
            holds,
            blocking,
            detail,
        });
    };
    push(
        "f increasing".into(),
        f.monotone_increasing(plan, 256)?,
        true,
        None,
    );
    push(
        format!("f is {f_label}-convex under h1"),
        check_class(f_label, f, h1, plan)?.convex_supported(),
        true,
        None,
    );
    push(
        format!("g is {g_label}-convex under h2"),
        check_class(g_label, g, h2, plan)?.convex_supported(),
        true,
        None,
    );
    let sum = check_symmetric_sum_bound(h2, 1.0, SumBound::AtMost, plan)?;
    push(sum.predicate.clone(), sum.holds(), false, None);
    if let Some((at, want)) = composition_boundary(f_label, g_label) {
        let (p, val) = boundary_value(f, at, plan);
        let (holds, detail) = match val {
            Ok(v) => ((v - want).abs() <= BOUNDARY_TOL, format!("f({p}) = {v}")),
            Err(e) => (false, e.to_string()),
        };
        push(format!("f({at}) = {want}"), holds, false, Some(detail));
        let sm = check_supermultiplicative(h1, plan)?;
        push("h1 supermultiplicative".into(), sm.holds(), false, None);
    }
    if let Some(h) = report.hypotheses.iter().find(|h| h.blocking && !h.holds) {
        report.verdict =
            Verdict::indeterminate(rule.to_string(), format!("hypothesis failed: {}", h.name));
        return Ok(report);
    }
    report.verdict = check_class(rule, &f.compose(g), &weight, plan)?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionalFamily {
    AG,
    GA,
    GG,
}

impl FunctionalFamily {
    /// Boundary point and the value `f` must take there.
    pub fn boundary(self) -> (f64, f64) {
        match self {
            FunctionalFamily::AG => (0.0, 1.0),
            FunctionalFamily::GA => (1.0, 0.0),
            FunctionalFamily::GG => (1.0, 1.0),
        }
    }

    pub fn label(self) -> ClassLabel {
        use MeanKind::*;
        match self {
            FunctionalFamily::AG => ClassLabel::new(Arithmetic, Geometric),
            FunctionalFamily::GA => ClassLabel::new(Geometric, Arithmetic),
            FunctionalFamily::GG => ClassLabel::new(Geometric, Geometric),
        }
    }
}

impl std::str::FromStr for FunctionalFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AG" => Ok(FunctionalFamily::AG),
            "GA" => Ok(FunctionalFamily::GA),
            "GG" => Ok(FunctionalFamily::GG),
            _ => Err(Error::Spec(format!(
                "functional family must be AG, GA or GG, got `{s}`"
            ))),
        }
    }
}

fn nonneg(f: &ScalarFn, x: f64) -> Result<f64> {
    let v = f.eval(x)?;
    if v < 0.0 {
        return Err(Error::PositivityFailure { at: x, value: v });
    }
    Ok(v)
}

/// Both sides of the extended inequality at `(x, y, α, β)`; `None` when the
/// mixed point leaves `f`'s domain.
#[allow(clippy::many_single_char_names)]
pub fn functional_gap(
    family: FunctionalFamily,
    f: &ScalarFn,
    h: &HFunction,
    x: f64,
    y: f64,
    alpha: f64,
    beta: f64,
) -> Result<Option<Gap>> {
    let z = match family {
        FunctionalFamily::AG => alpha * x + beta * y,
        FunctionalFamily::GA | FunctionalFamily::GG => {
            if !(x > 0.0 && y > 0.0) {
                return Err(Error::Domain(format!(
                    "geometric mixing needs positive points, got {x}, {y}"
                )));
            }
            (alpha * x.ln() + beta * y.ln()).exp()
        }
    };
    if !f.domain.contains_closed(z) {
        return Ok(None);
    }
    let (ha, hb) = (h.weight(alpha)?, h.weight(beta)?);
    let (fx, fy, fz) = (nonneg(f, x)?, nonneg(f, y)?, nonneg(f, z)?);
    let rhs = match family {
        FunctionalFamily::GA => ha * fx + hb * fy,
        FunctionalFamily::AG | FunctionalFamily::GG => fx.powf(ha) * fy.powf(hb),
    };
    Ok(Some(Gap::new(fz, rhs)))
}

/// Seeded uniform samples of `{α, β > 0, α + β ≤ 1}` by folding the unit square.
pub fn simplex_samples(n: usize, plan: &SamplePlan) -> Vec<[f64; 2]> {
    let mut rng = plan.rng();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (u, v): (f64, f64) = (rng.gen(), rng.gen());
        if u == 0.0 || v == 0.0 {
            continue;
        }
        out.push(if u + v > 1.0 {
            [1.0 - u, 1.0 - v]
        } else {
            [u, v]
        });
    }
    out
}

pub const SIMPLEX_SAMPLES: usize = 512;
const FUNCTIONAL_AXIS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalReport {
    pub family: FunctionalFamily,
    pub direction: Direction,
    pub boundary_point: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_value: Option<f64>,
    pub boundary_expected: f64,
    pub boundary_ok: bool,
    pub multiplicativity: PredicateVerdict,
    /// Whether the sampled inequality holds in the requested direction.
    pub holds: bool,
    pub verdict: Verdict,
}

/// Sampled check of the extended inequality over `x × y × (α, β)`.
///
/// The boundary value and the multiplicativity of `h` are reported alongside;
/// the converse implications (inequality forces the boundary value when
/// `h(α) < 1/2` for some `α < 1/2`) are left to the reader of the report.
pub fn functional_inequality_check(
    family: FunctionalFamily,
    f: &ScalarFn,
    h: &HFunction,
    direction: Direction,
    plan: &SamplePlan,
) -> Result<FunctionalReport> {
    plan.validate()?;
    let (at, want) = family.boundary();
    let (p, val) = boundary_value(f, at, plan);
    let boundary_value = val.ok();
    let boundary_ok = boundary_value.is_some_and(|v| (v - want).abs() <= BOUNDARY_TOL);
    let multiplicativity = match direction {
        Direction::Convex => check_supermultiplicative(h, plan)?,
        Direction::Concave => check_submultiplicative(h, plan)?,
    };
    let (a, b) = plan.shrink(&f.domain);
    let xs = spaced(a, b, FUNCTIONAL_AXIS, a > 0.0);
    let simplex = simplex_samples(SIMPLEX_SAMPLES, plan);
    let mut pts = Vec::with_capacity(xs.len() * xs.len() * simplex.len());
    for &x in &xs {
        for &y in &xs {
            pts.extend(simplex.iter().map(|s| [x, y, s[0], s[1]]));
        }
    }
    let label = format!("{family:?} functional");
    let verdict = verdict_over(label, &pts, plan, |q| {
        functional_gap(family, f, h, q[0], q[1], q[2], q[3])
    })?;
    Ok(FunctionalReport {
        family,
        direction,
        boundary_point: p,
        boundary_value,
        boundary_expected: want,
        boundary_ok,
        multiplicativity,
        holds: direction_holds(&verdict, direction),
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::residual_gap;
    use crate::verdict::Status;
    use proptest::prelude::*;

    fn f(s: &str, lo: f64, hi: f64) -> ScalarFn {
        ScalarFn::parse(s)
            .unwrap()
            .on(Interval::new(lo, hi).unwrap())
    }

    fn label(s: &str) -> ClassLabel {
        s.parse().unwrap()
    }

    fn small() -> SamplePlan {
        SamplePlan::default().with_grid(24).with_random(64)
    }

    #[test]
    fn ordering_examples() {
        let p = small();
        let r = check_ordering(&f("exp", 0.1, 3.0), &f("expr:x^2", 0.1, 3.0), &p).unwrap();
        assert_eq!(r.relation, Ordering::SimilarlyOrdered);
        let r = check_ordering(&f("exp", 0.1, 3.0), &f("neg_exp", 0.1, 3.0), &p).unwrap();
        assert_eq!(r.relation, Ordering::OppositelyOrdered);
        let (a, b) = (f("expr:x*(1-x)", 0.1, 0.9), f("exp", 0.1, 0.9));
        let r = check_ordering(&a, &b, &p).unwrap();
        assert_eq!(r.relation, Ordering::Neither);
        // the witness pair really breaks similar ordering
        let [x, y] = r.witness.unwrap();
        let prod =
            (a.eval(x).unwrap() - a.eval(y).unwrap()) * (b.eval(x).unwrap() - b.eval(y).unwrap());
        assert!(prod < 0.0);
    }

    #[test]
    fn closure_examples() {
        let p = small();
        let aa = label("AA");
        let id = HFunction::identity();
        let sq = f("expr:x^2", 0.1, 2.0);
        let v = closure_check(ClosureOp::Sum, &sq, &f("exp", 0.1, 2.0), aa, &id, &p).unwrap();
        assert!(v.convex_supported());
        let v = closure_check(ClosureOp::Scale(2.5), &sq, &sq, aa, &id, &p).unwrap();
        assert!(v.convex_supported());
        let v = closure_check(ClosureOp::Max, &sq, &f("expr:1", 0.1, 2.0), aa, &id, &p).unwrap();
        assert!(v.convex_supported());
        // sqrt is not AA-convex
        let v = closure_check(
            ClosureOp::Sum,
            &f("expr:sqrt(x)", 0.1, 2.0),
            &sq,
            aa,
            &id,
            &p,
        )
        .unwrap();
        assert_eq!(v.status, Status::Indeterminate);
        assert!(v.reason.unwrap().starts_with("hypothesis failed"));
    }

    #[test]
    fn product_of_similarly_ordered_aa_functions() {
        let p = small();
        let id = HFunction::identity();
        let a = MeanKind::Arithmetic;
        let v = product_rule(
            &f("exp", 0.1, 2.0),
            &f("expr:x^2", 0.1, 2.0),
            a,
            a,
            &id,
            &id,
            1.0,
            Direction::Convex,
            &p,
        )
        .unwrap();
        assert!(v.convex_supported(), "{v:?}");
    }

    #[test]
    fn product_hypothesis_failures_are_named() {
        let p = small();
        let id = HFunction::identity();
        let a = MeanKind::Arithmetic;
        let v = product_rule(
            &f("exp", 0.1, 2.0),
            &f("expr:x^2", 0.1, 2.0),
            a,
            a,
            &id,
            &id,
            0.5,
            Direction::Convex,
            &p,
        )
        .unwrap();
        assert_eq!(v.status, Status::Indeterminate);
        assert!(v.reason.unwrap().contains("h(t) + h(1-t) <= 0.5"));
        let v = product_rule(
            &f("exp", 0.1, 2.0),
            &f("neg_exp", 0.1, 2.0),
            a,
            a,
            &id,
            &id,
            1.0,
            Direction::Convex,
            &p,
        )
        .unwrap();
        assert_eq!(
            v.reason.unwrap(),
            "hypothesis failed: f and g are not SimilarlyOrdered"
        );
    }

    #[test]
    fn product_oppositely_ordered_harmonic_case_runs() {
        let p = small();
        let id = HFunction::identity();
        let v = product_rule(
            &f("exp", 0.1, 2.0),
            &f("neg_exp", 0.1, 2.0),
            MeanKind::Harmonic,
            MeanKind::Arithmetic,
            &id,
            &id,
            1.0,
            Direction::Convex,
            &p,
        )
        .unwrap();
        // exp is not A_tH-convex, so the bundle stops at the class hypothesis
        assert_eq!(
            v.reason.as_deref(),
            Some("hypothesis failed: f is not AH-convex under h1")
        );
    }

    #[test]
    fn squaring_an_increasing_aa_convex_function() {
        let p = small();
        let id = HFunction::identity();
        let a = MeanKind::Arithmetic;
        let g = f("expr:x^2+1", 0.1, 2.0);
        let v = product_rule(&g, &g, a, a, &id, &id, 1.0, Direction::Convex, &p).unwrap();
        assert!(v.convex_supported());
    }

    /// The table as printed, row by row: (f, g, f∘g).
    const PRINTED_TABLE: [(&str, &str, &str); 27] = [
        ("AA", "AA", "AA"),
        ("GA", "AG", "AA"),
        ("HA", "AH", "AA"),
        ("AG", "AA", "AG"),
        ("GG", "AG", "AG"),
        ("HG", "AH", "AG"),
        ("AH", "AA", "AH"),
        ("GH", "AG", "AH"),
        ("HH", "AH", "AH"),
        ("AA", "GA", "GA"),
        ("GA", "GG", "GA"),
        ("HA", "GH", "GA"),
        ("GG", "GG", "GG"),
        ("AG", "GA", "GG"),
        ("HG", "GH", "GG"),
        ("AH", "GA", "GH"),
        ("GH", "GG", "GH"),
        ("HH", "GH", "GH"),
        ("AA", "HA", "HA"),
        ("GA", "HG", "HA"),
        ("HA", "HH", "HA"),
        ("AG", "HA", "HG"),
        ("GG", "HG", "HG"),
        ("HG", "HH", "HG"),
        ("HH", "HH", "HH"),
        ("AH", "HA", "HH"),
        ("GH", "HG", "HH"),
    ];

    #[test]
    fn compose_rule_matches_printed_table_exactly() {
        let mut hits = 0;
        for fl in ClassLabel::all() {
            for gl in ClassLabel::all() {
                let printed = PRINTED_TABLE
                    .iter()
                    .find(|(a, b, _)| label(a) == fl && label(b) == gl)
                    .map(|r| label(r.2));
                assert_eq!(compose_rule(fl, gl), printed, "{fl} ∘ {gl}");
                hits += printed.is_some() as usize;
            }
        }
        assert_eq!(hits, 27);
        let table = composition_table();
        assert_eq!(table.len(), 27);
        for row in &table {
            assert!(PRINTED_TABLE.iter().any(|r| label(r.0) == row.f_label
                && label(r.1) == row.g_label
                && label(r.2) == row.result));
        }
    }

    #[test]
    fn compose_rule_examples() {
        assert_eq!(compose_rule(label("GA"), label("AG")), Some(label("AA")));
        assert_eq!(compose_rule(label("HG"), label("GH")), Some(label("GG")));
        assert_eq!(compose_rule(label("AA"), label("GG")), None);
    }

    #[test]
    fn verify_composition_square_of_exp() {
        let p = small();
        let id = HFunction::identity();
        let outer = f("expr:x^2", 1.0, 10.0);
        let inner = f("exp", 0.1, 2.0);
        let r = verify_composition(&outer, &inner, label("AA"), label("AA"), &id, &id, &p).unwrap();
        assert_eq!(r.rule, Some(label("AA")));
        assert!(r.verdict.convex_supported(), "{r:?}");
        assert!(r.hypotheses.iter().all(|h| h.holds));
    }

    #[test]
    fn verify_composition_guards() {
        let p = small();
        let id = HFunction::identity();
        let r = verify_composition(
            &f("exp", 0.1, 3.0),
            &f("exp", 0.1, 1.0),
            label("AA"),
            label("GG"),
            &id,
            &id,
            &p,
        )
        .unwrap();
        assert_eq!(r.verdict.reason.as_deref(), Some("no rule"));
        let e = verify_composition(
            &f("exp", 0.1, 1.0),
            &f("exp", 0.1, 2.0),
            label("AA"),
            label("AA"),
            &id,
            &id,
            &p,
        )
        .unwrap_err();
        assert!(matches!(e, Error::RangeMismatch(_)));
        let r = verify_composition(
            &f("neg_exp", 0.5, 10.0),
            &f("exp", 0.1, 2.0),
            label("AA"),
            label("AA"),
            &id,
            &id,
            &p,
        )
        .unwrap();
        assert_eq!(
            r.verdict.reason.as_deref(),
            Some("hypothesis failed: f increasing")
        );
    }

    #[test]
    fn composition_with_power_weights_matches_direct_check() {
        let p = small();
        let (h1, h2) = (HFunction::power(0.5), HFunction::power(0.5));
        let outer = f("exp", 1.0, 10.0);
        let inner = f("cosh", 0.1, 2.0);
        let r = verify_composition(&outer, &inner, label("AG"), label("AA"), &h1, &h2, &p).unwrap();
        let w = r.weight.clone().unwrap();
        assert_eq!(w, HFunction::power(0.25));
        let direct = check_class(label("AG"), &outer.compose(&inner), &w, &p).unwrap();
        assert_eq!(r.verdict, direct);
    }

    #[test]
    fn functional_examples_run() {
        let p = small();
        let h = HFunction::power(0.5);
        let r = functional_inequality_check(
            FunctionalFamily::AG,
            &f("expr:exp(x^2)", 0.0, 1.0),
            &h,
            Direction::Convex,
            &p,
        )
        .unwrap();
        assert!(r.boundary_ok);
        assert!(r.multiplicativity.holds());
        assert!(r.verdict.samples > 0);
        let r = functional_inequality_check(
            FunctionalFamily::GA,
            &f("expr:log(1/x)", 0.0, 1.0),
            &h,
            Direction::Convex,
            &p,
        )
        .unwrap();
        assert!(r.boundary_ok, "{:?}", r.boundary_value);
        assert!(r.verdict.samples > 0);
        let r = functional_inequality_check(
            FunctionalFamily::GG,
            &f("exp", 0.5, 3.0),
            &h,
            Direction::Convex,
            &p,
        )
        .unwrap();
        assert!(!r.boundary_ok);
    }

    #[test]
    fn simplex_samples_lie_in_triangle() {
        let s = simplex_samples(2000, &SamplePlan::default());
        assert!(s.iter().all(|[a, b]| *a > 0.0 && *b > 0.0 && a + b <= 1.0));
        // the fold keeps the density uniform: about half the mass has α < 1/2·(1 − β)
        let below = s.iter().filter(|[a, b]| a + b < 1.0 / 2f64.sqrt()).count() as f64 / 2000.0;
        assert!((below - 0.5).abs() < 0.05, "{below}");
    }

    proptest! {
        #[test]
        fn unit_slice_reproduces_class_residual(
            x in 0.05f64..0.95, y in 0.05f64..0.95, t in 0.01f64..0.99, r in 0.1f64..1.5,
        ) {
            let h = HFunction::power(r);
            let g = f("expr:exp(x^2)", 0.0, 1.0);
            for fam in [FunctionalFamily::AG, FunctionalFamily::GA, FunctionalFamily::GG] {
                let a = functional_gap(fam, &g, &h, x, y, t, 1.0 - t).unwrap().unwrap();
                let b = residual_gap(fam.label(), &g, &h, x, y, t).unwrap();
                prop_assert!((a.residual() - b.residual()).abs() <= 1e-12 * (1.0 + b.lhs.abs().max(b.rhs.abs())));
            }
        }

        #[test]
        fn compose_rule_needs_matching_inner_mean(i in 0usize..9, j in 0usize..9) {
            let (fl, gl) = (ClassLabel::all()[i], ClassLabel::all()[j]);
            prop_assert_eq!(compose_rule(fl, gl).is_some(), gl.n == fl.m);
        }
    }
}
