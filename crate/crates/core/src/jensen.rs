//! Weighted n-point Jensen inequalities for the nine classes and their
//! converse bounds on an enclosing interval `[m, M]`.

use serde::Serialize;

use crate::classes::ClassLabel;
use crate::error::{Error, Result};
use crate::funcs::{SamplePlan, ScalarFn};
use crate::hfun::{check_submultiplicative, check_supermultiplicative, HFunction};
use crate::means::{check_points, weighted_mean_n, MeanKind, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Jensen,
    Converse,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JensenReport {
    pub label: ClassLabel,
    pub form: Form,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub gap: f64,
    pub holds: bool,
    pub n: usize,
    /// Multiplicativity of `h` that the inequality needs.
    pub hypothesis: String,
    pub hypothesis_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub big_m: Option<f64>,
}

/// Super for value-side `A` and `G`, sub for `H`.
fn hypothesis(label: ClassLabel, h: &HFunction, plan: &SamplePlan) -> Result<(String, bool)> {
    let v = match label.n {
        MeanKind::Harmonic => check_submultiplicative(h, plan)?,
        _ => check_supermultiplicative(h, plan)?,
    };
    Ok((format!("h {}", v.predicate), v.holds()))
}

/// Value-side aggregate `Σ h(v)f`, `Π f^{h(v)}` or `(Σ h(v)/f)^{-1}`.
fn aggregate(n: MeanKind, hv: &[f64], fx: &[f64]) -> f64 {
    let it = hv.iter().zip(fx);
    match n {
        MeanKind::Arithmetic => it.map(|(h, f)| h * f).sum(),
        MeanKind::Geometric => it.map(|(h, f)| h * f.ln()).sum::<f64>().exp(),
        MeanKind::Harmonic => 1.0 / it.map(|(h, f)| h / f).sum::<f64>(),
    }
}

fn report(
    label: ClassLabel,
    form: Form,
    lhs: f64,
    rhs: f64,
    n: usize,
    hyp: (String, bool),
    plan: &SamplePlan,
) -> Result<JensenReport> {
    if !lhs.is_finite() || !rhs.is_finite() {
        return Err(Error::Eval(format!(
            "non-finite sides lhs = {lhs}, rhs = {rhs}"
        )));
    }
    Ok(JensenReport {
        label,
        form,
        lhs,
        rhs,
        gap: rhs - lhs,
        holds: plan.tol.ge(rhs, lhs),
        n,
        hypothesis: hyp.0,
        hypothesis_ok: hyp.1,
        m: None,
        big_m: None,
    })
}

struct Prepared {
    v: Vec<f64>,
    hv: Vec<f64>,
    fx: Vec<f64>,
}

fn prepare(f: &ScalarFn, h: &HFunction, w: &WeightVector, points: &[f64]) -> Result<Prepared> {
    check_points(w, points)?;
    let v = w.normalized();
    let hv = v.iter().map(|&t| h.weight(t)).collect::<Result<Vec<_>>>()?;
    let fx = points
        .iter()
        .map(|&x| f.eval_positive(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared { v, hv, fx })
}

/// `f(M(x; w)) ≤ N_h(f(x); w)` with the value side weighted by `h(w_k/W_n)`.
pub fn jensen_eval(
    label: ClassLabel,
    f: &ScalarFn,
    h: &HFunction,
    w: &WeightVector,
    points: &[f64],
) -> Result<JensenReport> {
    jensen_eval_with(label, f, h, w, points, &SamplePlan::default())
}

/// `jensen_eval` with the tolerance and hypothesis sampling taken from `plan`.
pub fn jensen_eval_with(
    label: ClassLabel,
    f: &ScalarFn,
    h: &HFunction,
    w: &WeightVector,
    points: &[f64],
    plan: &SamplePlan,
) -> Result<JensenReport> {
    let p = prepare(f, h, w, points)?;
    let lhs = f.eval_positive(weighted_mean_n(label.m, w, points)?)?;
    let rhs = aggregate(label.n, &p.hv, &p.fx);
    report(
        label,
        Form::Jensen,
        lhs,
        rhs,
        points.len(),
        hypothesis(label, h, plan)?,
        plan,
    )
}

/// Interpolation weights `(on f(m), on f(M))` of `x` inside `(m, M)` for the
/// argument-side mean: linear, log-ratio or harmonic.
pub fn interpolation_weights(kind: MeanKind, x: f64, m: f64, big_m: f64) -> (f64, f64) {
    match kind {
        MeanKind::Arithmetic => ((big_m - x) / (big_m - m), (x - m) / (big_m - m)),
        MeanKind::Geometric => {
            let d = (big_m / m).ln();
            ((big_m / x).ln() / d, (x / m).ln() / d)
        }
        MeanKind::Harmonic => {
            let d = x * (big_m - m);
            (m * (big_m - x) / d, big_m * (x - m) / d)
        }
    }
}

/// Default enclosing interval: the extreme points pushed out by `10⁻³` relative.
pub fn default_bounds(points: &[f64]) -> (f64, f64) {
    let lo = points.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = points.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo * (1.0 - 1e-3), hi * (1.0 + 1e-3))
}

/// Upper bound of the Jensen aggregate in terms of `f(m)` and `f(M)`.
///
/// Rows `AG`, `AH`, `G·`, `H·` follow the printed converse forms; in `AG` the
/// weight enters as `h(a·w_k/W_n)`, elsewhere as the product `h(a)·h(w_k/W_n)`.
/// The `AA` row is the same construction from the two-point `A_tA_h` bound:
/// `Σ h(w_k/W_n)[h(a_k)f(m) + h(b_k)f(M)]`.
pub fn converse_jensen_eval(
    label: ClassLabel,
    f: &ScalarFn,
    h: &HFunction,
    w: &WeightVector,
    points: &[f64],
    m: Option<f64>,
    big_m: Option<f64>,
) -> Result<JensenReport> {
    converse_jensen_eval_with(label, f, h, w, points, m, big_m, &SamplePlan::default())
}

#[allow(clippy::too_many_arguments)]
pub fn converse_jensen_eval_with(
    label: ClassLabel,
    f: &ScalarFn,
    h: &HFunction,
    w: &WeightVector,
    points: &[f64],
    m: Option<f64>,
    big_m: Option<f64>,
    plan: &SamplePlan,
) -> Result<JensenReport> {
    let p = prepare(f, h, w, points)?;
    let (dm, dbig) = default_bounds(points);
    let (m, big_m) = (m.unwrap_or(dm), big_m.unwrap_or(dbig));
    if !(m > 0.0 && m < big_m) {
        return Err(Error::Domain(format!(
            "need 0 < m < M, got m = {m}, M = {big_m}"
        )));
    }
    if let Some(x) = points.iter().find(|&&x| !(x > m && x < big_m)) {
        return Err(Error::Domain(format!(
            "point {x} not strictly inside ({m}, {big_m})"
        )));
    }
    let (fm, fbig) = (f.eval_positive(m)?, f.eval_positive(big_m)?);
    let lhs = aggregate(label.n, &p.hv, &p.fx);
    let mut acc = 0.0;
    for ((&x, &v), &hv) in points.iter().zip(&p.v).zip(&p.hv) {
        let (a, b) = interpolation_weights(label.m, x, m, big_m);
        acc += match (label.m, label.n) {
            (MeanKind::Arithmetic, MeanKind::Geometric) => {
                h.weight(a * v)? * fm.ln() + h.weight(b * v)? * fbig.ln()
            }
            (_, MeanKind::Arithmetic) => hv * (h.weight(a)? * fm + h.weight(b)? * fbig),
            (_, MeanKind::Geometric) => hv * (h.weight(a)? * fm.ln() + h.weight(b)? * fbig.ln()),
            (_, MeanKind::Harmonic) => hv * (h.weight(b)? * fm + h.weight(a)? * fbig) / (fm * fbig),
        };
    }
    let rhs = match label.n {
        MeanKind::Arithmetic => acc,
        MeanKind::Geometric => acc.exp(),
        MeanKind::Harmonic => 1.0 / acc,
    };
    let mut r = report(
        label,
        Form::Converse,
        lhs,
        rhs,
        points.len(),
        hypothesis(label, h, plan)?,
        plan,
    )?;
    r.m = Some(m);
    r.big_m = Some(big_m);
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub jensen: JensenReport,
    pub converse: JensenReport,
    pub chain_ok: bool,
}

/// Jensen followed by its converse: `f(mean) ≤ aggregate ≤ endpoint bound`.
#[allow(clippy::too_many_arguments)]
pub fn jensen_chain_check(
    label: ClassLabel,
    f: &ScalarFn,
    h: &HFunction,
    w: &WeightVector,
    points: &[f64],
    m: Option<f64>,
    big_m: Option<f64>,
    plan: &SamplePlan,
) -> Result<ChainReport> {
    let jensen = jensen_eval_with(label, f, h, w, points, plan)?;
    let converse = converse_jensen_eval_with(label, f, h, w, points, m, big_m, plan)?;
    let chain_ok = jensen.holds && converse.holds;
    Ok(ChainReport {
        jensen,
        converse,
        chain_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::residual;
    use crate::funcs::Interval;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn label(s: &str) -> ClassLabel {
        s.parse().unwrap()
    }

    fn f(s: &str, lo: f64, hi: f64) -> ScalarFn {
        ScalarFn::parse(s)
            .unwrap()
            .on(Interval::new(lo, hi).unwrap())
    }

    #[test]
    fn ga_exp_equal_weights() {
        let e = std::f64::consts::E;
        let r = jensen_eval(
            label("GA"),
            &f("exp", 0.1, 10.0),
            &HFunction::identity(),
            &WeightVector::equal(3).unwrap(),
            &[1.0, 2.0, 4.0],
        )
        .unwrap();
        assert_relative_eq!(r.lhs, e * e, max_relative = 1e-14);
        assert_relative_eq!(r.rhs, (e + e * e + e.powi(4)) / 3.0, max_relative = 1e-14);
        assert_relative_eq!(r.rhs, 21.568, epsilon = 1e-3);
        assert!(r.holds && r.hypothesis_ok);
    }

    #[test]
    fn ag_cosh_five_points() {
        let w = WeightVector::new(vec![0.3, 1.2, 0.7, 2.0, 0.9]).unwrap();
        let r = jensen_eval(
            label("AG"),
            &f("cosh", 0.1, 3.0),
            &HFunction::power(0.5),
            &w,
            &[0.2, 0.9, 1.4, 2.2, 2.9],
        )
        .unwrap();
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn hypothesis_flag_does_not_abort() {
        // 1 + xy < (1 + x)(1 + y), so 1 + t is not supermultiplicative
        let h = HFunction::parse("expr:1+t").unwrap();
        let r = jensen_eval(
            label("AA"),
            &f("exp", 0.1, 3.0),
            &h,
            &WeightVector::equal(3).unwrap(),
            &[0.5, 1.0, 2.0],
        )
        .unwrap();
        assert!(!r.hypothesis_ok);
        assert_eq!(r.hypothesis, "h supermultiplicative");
    }

    #[test]
    fn converse_endpoint_saturation() {
        let (m, big) = (1.0, 3.0);
        let eps = 1e-9;
        let r = converse_jensen_eval(
            label("AG"),
            &f("exp", 0.5, 4.0),
            &HFunction::identity(),
            &WeightVector::equal(2).unwrap(),
            &[m + eps, big - eps],
            Some(m),
            Some(big),
        )
        .unwrap();
        assert!(r.holds);
        assert!(r.gap.abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn converse_rows_match_printed_forms() {
        let g = f("expr:1+x^2", 0.1, 5.0);
        let fv = |x: f64| 1.0 + x * x;
        let hh = |t: f64| t.powf(0.8);
        let h = HFunction::power(0.8);
        let w = WeightVector::new(vec![1.0, 2.0, 3.0]).unwrap();
        let xs = [1.2, 1.9, 2.6];
        let (m, big) = (1.0, 3.0);
        let v: Vec<f64> = w.normalized();
        let (fm, fb) = (fv(m), fv(big));
        let lin = |x: f64| ((big - x) / (big - m), (x - m) / (big - m));
        let lg = |x: f64| {
            (
                (big / x).ln() / (big / m).ln(),
                (x / m).ln() / (big / m).ln(),
            )
        };
        let hm = |x: f64| {
            (
                m * (big - x) / (x * (big - m)),
                big * (x - m) / (x * (big - m)),
            )
        };
        let sum = |g: &dyn Fn(usize) -> f64| (0..3).map(g).sum::<f64>();
        let prod = |g: &dyn Fn(usize) -> f64| (0..3).map(g).product::<f64>();
        let cases: [(&str, f64); 9] = [
            (
                "AA",
                sum(&|k| hh(v[k]) * (hh(lin(xs[k]).0) * fm + hh(lin(xs[k]).1) * fb)),
            ),
            (
                "AG",
                prod(&|k| fm.powf(hh(lin(xs[k]).0 * v[k])) * fb.powf(hh(lin(xs[k]).1 * v[k]))),
            ),
            (
                "AH",
                1.0 / sum(&|k| {
                    (hh(lin(xs[k]).1) * fm + hh(lin(xs[k]).0) * fb) / (fm * fb) * hh(v[k])
                }),
            ),
            (
                "GA",
                sum(&|k| hh(v[k]) * (hh(lg(xs[k]).0) * fm + hh(lg(xs[k]).1) * fb)),
            ),
            (
                "GG",
                prod(&|k| {
                    fm.powf(hh(lg(xs[k]).0) * hh(v[k])) * fb.powf(hh(lg(xs[k]).1) * hh(v[k]))
                }),
            ),
            (
                "GH",
                1.0 / sum(&|k| {
                    (hh(lg(xs[k]).1) * fm + hh(lg(xs[k]).0) * fb) / (fm * fb) * hh(v[k])
                }),
            ),
            (
                "HA",
                sum(&|k| (hh(hm(xs[k]).0) * fm + hh(hm(xs[k]).1) * fb) * hh(v[k])),
            ),
            (
                "HG",
                prod(&|k| {
                    fm.powf(hh(hm(xs[k]).0) * hh(v[k])) * fb.powf(hh(hm(xs[k]).1) * hh(v[k]))
                }),
            ),
            (
                "HH",
                1.0 / sum(&|k| {
                    (hh(hm(xs[k]).1) * fm + hh(hm(xs[k]).0) * fb) / (fm * fb) * hh(v[k])
                }),
            ),
        ];
        for (l, want) in cases {
            let r = converse_jensen_eval(label(l), &g, &h, &w, &xs, Some(m), Some(big)).unwrap();
            assert_relative_eq!(r.rhs, want, max_relative = 1e-13);
        }
    }

    #[test]
    fn converse_needs_interior_points() {
        let e = converse_jensen_eval(
            label("GA"),
            &f("exp", 0.5, 4.0),
            &HFunction::identity(),
            &WeightVector::equal(3).unwrap(),
            &[1.2, 1.8, 3.5],
            Some(1.0),
            Some(3.0),
        )
        .unwrap_err();
        assert!(matches!(e, Error::Domain(_)));
    }

    #[test]
    fn chain_example() {
        let plan = SamplePlan::default();
        let r = jensen_chain_check(
            label("GA"),
            &f("exp", 0.5, 4.0),
            &HFunction::identity(),
            &WeightVector::equal(3).unwrap(),
            &[1.2, 1.8, 2.4],
            Some(1.0),
            Some(3.0),
            &plan,
        )
        .unwrap();
        assert!(r.chain_ok, "{r:?}");
        assert!(r.jensen.rhs == r.converse.lhs);
    }

    #[test]
    fn length_and_weight_errors() {
        let g = f("exp", 0.1, 3.0);
        let h = HFunction::identity();
        let e = jensen_eval(
            label("AA"),
            &g,
            &h,
            &WeightVector::equal(2).unwrap(),
            &[1.0, 2.0, 3.0],
        )
        .unwrap_err();
        assert_eq!(
            e,
            Error::LengthMismatch {
                weights: 2,
                points: 3
            }
        );
        assert!(matches!(
            WeightVector::new(vec![1.0, 0.0]),
            Err(Error::DegenerateWeights(_))
        ));
    }

    /// Two applications of the two-point inequality, as in the induction step.
    fn two_step_rhs(h: &HFunction, w: [f64; 3], fx: [f64; 3]) -> f64 {
        let (w3, w2) = (w.iter().sum::<f64>(), w[0] + w[1]);
        let hw = |t: f64| h.weight(t).unwrap();
        hw(w[2] / w3) * fx[2] + hw(w2 / w3) * (hw(w[0] / w2) * fx[0] + hw(w[1] / w2) * fx[1])
    }

    proptest! {
        #[test]
        fn induction_consistency(w in prop::array::uniform3(0.1f64..5.0), x in prop::array::uniform3(0.2f64..2.5), r in 0.2f64..1.0) {
            let h = HFunction::power(r);
            let g = f("exp", 0.1, 3.0);
            let wv = WeightVector::new(w.to_vec()).unwrap();
            let fx = x.map(|v| v.exp());
            for l in ["AA", "GA"] {
                let rep = jensen_eval(label(l), &g, &h, &wv, &x).unwrap();
                let want = two_step_rhs(&h, w, fx);
                prop_assert!((rep.rhs - want).abs() <= 1e-10 * want.abs().max(1.0));
            }
        }

        #[test]
        fn two_point_reduction(x1 in 0.2f64..2.5, x2 in 0.2f64..2.5, w1 in 0.05f64..3.0, w2 in 0.05f64..3.0, r in 0.2f64..1.0) {
            let h = HFunction::power(r);
            let g = f("cosh", 0.1, 3.0);
            let w = WeightVector::new(vec![w1, w2]).unwrap();
            let v1 = w1 / (w1 + w2);
            for l in ClassLabel::all() {
                let rep = jensen_eval(l, &g, &h, &w, &[x1, x2]).unwrap();
                // the harmonic n-point mean weights 1/x_k, so its pair form puts v1 on x2
                let res = if l.m == MeanKind::Harmonic {
                    residual(l, &g, &h, x2, x1, v1).unwrap()
                } else {
                    residual(l, &g, &h, x1, x2, v1).unwrap()
                };
                prop_assert!((rep.gap - res).abs() <= 1e-12 * rep.rhs.abs().max(1.0), "{} {} {}", l, rep.gap, res);
            }
        }

        #[test]
        fn scale_and_permutation_invariance(
            w in prop::collection::vec(0.1f64..5.0, 2..8),
            seed in 0u64..1000,
            c in 0.01f64..100.0,
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let n = w.len();
            let xs: Vec<f64> = (0..n).map(|k| 0.3 + 2.0 * ((k as f64 * 0.618 + seed as f64 * 0.1) % 1.0)).collect();
            let g = f("exp", 0.1, 3.0);
            let h = HFunction::power(0.7);
            let base_w = WeightVector::new(w.clone()).unwrap();
            let scaled = WeightVector::new(w.iter().map(|v| v * c).collect()).unwrap();
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let pw = WeightVector::new(idx.iter().map(|&i| w[i]).collect()).unwrap();
            let px: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
            for l in ClassLabel::all() {
                let a = jensen_eval(l, &g, &h, &base_w, &xs).unwrap();
                for b in [jensen_eval(l, &g, &h, &scaled, &xs).unwrap(), jensen_eval(l, &g, &h, &pw, &px).unwrap()] {
                    prop_assert!((a.lhs - b.lhs).abs() <= 1e-12 * a.lhs.abs().max(1.0));
                    prop_assert!((a.rhs - b.rhs).abs() <= 1e-12 * a.rhs.abs().max(1.0));
                }
            }
        }
    }
}
