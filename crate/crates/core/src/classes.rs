//! The nine h-MN-convexity classes.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::funcs::plan::spaced;
use crate::funcs::{Interval, SamplePlan, ScalarFn};
use crate::hfun::HFunction;
use crate::means::{classical_mean, weighted_pair, MeanKind};
use crate::verdict::{sweep, Gap, Verdict};

/// `(M, N)`: `M` averages the arguments, `N` averages the values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassLabel {
    pub m: MeanKind,
    pub n: MeanKind,
}

impl ClassLabel {
    pub const fn new(m: MeanKind, n: MeanKind) -> Self {
        ClassLabel { m, n }
    }

    /// All nine labels, `AA` through `HH`.
    pub fn all() -> [ClassLabel; 9] {
        let k = MeanKind::ALL;
        let mut out = [ClassLabel::new(k[0], k[0]); 9];
        for (i, m) in k.iter().enumerate() {
            for (j, n) in k.iter().enumerate() {
                out[3 * i + j] = ClassLabel::new(*m, *n);
            }
        }
        out
    }

    pub fn index(self) -> usize {
        let pos = |k| {
            MeanKind::ALL
                .iter()
                .position(|x| *x == k)
                .expect("mean kind")
        };
        3 * pos(self.m) + pos(self.n)
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.m, self.n)
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut it = s.chars().map(MeanKind::from_code);
        match (it.next(), it.next(), it.next()) {
            (Some(Some(m)), Some(Some(n)), None) => Ok(ClassLabel::new(m, n)),
            _ => Err(Error::Spec(format!(
                "class label must be two of A/G/H, got `{s}`"
            ))),
        }
    }
}

impl Serialize for ClassLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClassLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Both sides of the class inequality at `(x, y, t)`: `lhs = f(M_t(x, y))`,
/// `rhs = N_h(f(x), f(y))` with each class's printed weight placement.
pub fn residual_gap(
    label: ClassLabel,
    f: &ScalarFn,
    h: &HFunction,
    x: f64,
    y: f64,
    t: f64,
) -> Result<Gap> {
    let fx = f.eval_positive(x)?;
    let fy = f.eval_positive(y)?;
    let z = classical_mean(label.m, t, x, y)?;
    let lhs = f.eval_positive(z)?;
    let (ht, hs) = (h.weight(t)?, h.weight(1.0 - t)?);
    // harmonic-argument classes carry h(1−t) on f(x)
    let (wx, wy) = if label.m == MeanKind::Harmonic {
        (hs, ht)
    } else {
        (ht, hs)
    };
    let rhs = weighted_pair(label.n, wx, wy, fx, fy)?;
    Ok(Gap::new(lhs, rhs))
}

/// `RHS − LHS` of the class inequality; non-negative where it holds.
pub fn residual(
    label: ClassLabel,
    f: &ScalarFn,
    h: &HFunction,
    x: f64,
    y: f64,
    t: f64,
) -> Result<f64> {
    residual_gap(label, f, h, x, y, t).map(|g| g.residual())
}

/// Weight axis: `[0, 1]` when `h` extends to both ends, shrunk otherwise.
pub fn t_axis(h: &HFunction, plan: &SamplePlan) -> (f64, f64) {
    if h.admits_endpoints() {
        (0.0, 1.0)
    } else {
        plan.shrink(&Interval::UNIT)
    }
}

/// Grid `x × y × t` plus seeded random triples over `f`'s shrunk domain.
pub fn class_samples(domain: &Interval, h: &HFunction, plan: &SamplePlan) -> Vec<[f64; 3]> {
    let xs = plan.point_axis(domain);
    let (ta, tb) = t_axis(h, plan);
    let ts = spaced(ta, tb, plan.grid_per_axis, false);
    let mut out = Vec::with_capacity(xs.len() * xs.len() * ts.len() + plan.random_count);
    for &x in &xs {
        for &y in &xs {
            for &t in &ts {
                out.push([x, y, t]);
            }
        }
    }
    let mut rng = plan.rng();
    let unit = Interval { lo: ta, hi: tb };
    let t_plan = SamplePlan {
        epsilon_margin: f64::MIN_POSITIVE,
        ..*plan
    };
    for _ in 0..plan.random_count {
        let x = plan.random_point(domain, &mut rng);
        let y = plan.random_point(domain, &mut rng);
        let t = t_plan.random_point(&unit, &mut rng);
        out.push([x, y, t]);
    }
    out
}

/// Sweep a gap over samples, mapping a positivity failure to Indeterminate.
pub(crate) fn verdict_over<P, F>(
    label: String,
    pts: &[P],
    plan: &SamplePlan,
    gap: F,
) -> Result<Verdict>
where
    P: AsRef<[f64]> + Sync,
    F: Fn(&[f64]) -> Result<Option<Gap>> + Sync,
{
    match sweep(pts, plan.tol, gap) {
        Ok(s) => Ok(s.into_verdict(label)),
        Err(Error::PositivityFailure { .. }) => {
            Ok(Verdict::indeterminate(label, "f not positive on domain"))
        }
        Err(e) => Err(e),
    }
}

/// Sampled verdict for one class.
pub fn check_class(
    label: ClassLabel,
    f: &ScalarFn,
    h: &HFunction,
    plan: &SamplePlan,
) -> Result<Verdict> {
    plan.validate()?;
    let pts = class_samples(&f.domain, h, plan);
    verdict_over(label.to_string(), &pts, plan, |p| {
        residual_gap(label, f, h, p[0], p[1], p[2]).map(Some)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Mixed,
}

/// Sign pattern of forward differences on a 256-point grid; a function with
/// no difference beyond tolerance counts as increasing.
pub fn monotonicity(f: &ScalarFn, plan: &SamplePlan) -> Result<Monotonicity> {
    let (a, b) = plan.shrink(&f.domain);
    let xs = spaced(a, b, 256, a > 0.0);
    let vals = xs.iter().map(|&x| f.eval(x)).collect::<Result<Vec<_>>>()?;
    let (mut up, mut down) = (false, false);
    for w in vals.windows(2) {
        let allow = plan.tol.allowance(w[0], w[1]);
        up |= w[1] - w[0] > allow;
        down |= w[0] - w[1] > allow;
    }
    Ok(match (up, down) {
        (true, true) => Monotonicity::Mixed,
        (false, true) => Monotonicity::Decreasing,
        _ => Monotonicity::Increasing,
    })
}

/// A lattice arrow `from ⇒ to` whose target was not supported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeInconsistency {
    pub from: ClassLabel,
    pub to: ClassLabel,
}

/// Arrows valid for increasing `f`: within a row `H ⇒ G ⇒ A` on the value
/// side (via `H_h ≤ G_h ≤ A_h`), within a column `A ⇒ G ⇒ H` on the argument
/// side (via `H_t ≤ G_t ≤ A_t`).
pub fn lattice_arrows() -> Vec<(ClassLabel, ClassLabel)> {
    use MeanKind::*;
    let mut out = Vec::new();
    for k in MeanKind::ALL {
        out.push((ClassLabel::new(k, Harmonic), ClassLabel::new(k, Geometric)));
        out.push((
            ClassLabel::new(k, Geometric),
            ClassLabel::new(k, Arithmetic),
        ));
        out.push((
            ClassLabel::new(Arithmetic, k),
            ClassLabel::new(Geometric, k),
        ));
        out.push((ClassLabel::new(Geometric, k), ClassLabel::new(Harmonic, k)));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMatrix {
    pub function: String,
    pub h: String,
    pub domain: Interval,
    pub monotonicity: Monotonicity,
    /// Row-major `AA, AG, AH, GA, …, HH`.
    pub verdicts: Vec<Verdict>,
    pub lattice_inconsistencies: Vec<LatticeInconsistency>,
}

impl ClassMatrix {
    pub fn get(&self, label: ClassLabel) -> &Verdict {
        &self.verdicts[label.index()]
    }
}

pub fn classify_all(f: &ScalarFn, h: &HFunction, plan: &SamplePlan) -> Result<ClassMatrix> {
    let verdicts = ClassLabel::all()
        .iter()
        .map(|l| check_class(*l, f, h, plan))
        .collect::<Result<Vec<_>>>()?;
    let mono = monotonicity(f, plan)?;
    let mut lattice = Vec::new();
    if mono == Monotonicity::Increasing {
        for (from, to) in lattice_arrows() {
            if verdicts[from.index()].convex_supported() && !verdicts[to.index()].convex_supported()
            {
                lattice.push(LatticeInconsistency { from, to });
            }
        }
    }
    Ok(ClassMatrix {
        function: f.to_string(),
        h: h.to_string(),
        domain: f.domain,
        monotonicity: mono,
        verdicts,
        lattice_inconsistencies: lattice,
    })
}

/// `f((x + y)/2) ≤ h(1/2)[f(x) + f(y)]` on sampled pairs.
pub fn check_midconvex(f: &ScalarFn, h: &HFunction, plan: &SamplePlan) -> Result<Verdict> {
    plan.validate()?;
    let xs = plan.point_axis(&f.domain);
    let mut pts: Vec<[f64; 2]> = xs
        .iter()
        .flat_map(|&x| xs.iter().map(move |&y| [x, y]))
        .collect();
    let mut rng = plan.rng();
    for _ in 0..plan.random_count {
        pts.push([
            plan.random_point(&f.domain, &mut rng),
            plan.random_point(&f.domain, &mut rng),
        ]);
    }
    let half = h.weight(0.5)?;
    verdict_over("midconvex".into(), &pts, plan, |p| {
        let (fx, fy) = (f.eval_positive(p[0])?, f.eval_positive(p[1])?);
        Ok(Some(Gap::new(
            f.eval_positive(0.5 * (p[0] + p[1]))?,
            half * (fx + fy),
        )))
    })
}
