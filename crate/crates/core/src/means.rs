//! Classical, h-weighted and n-point means.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::funcs::plan::spaced;
use crate::funcs::{Interval, SamplePlan};
use crate::hfun::{check_nondecreasing, HFunction};
use crate::verdict::{sweep, Gap, PredicateStatus, PredicateVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeanKind {
    #[serde(rename = "A")]
    Arithmetic,
    #[serde(rename = "G")]
    Geometric,
    #[serde(rename = "H")]
    Harmonic,
}

impl MeanKind {
    pub const ALL: [MeanKind; 3] = [
        MeanKind::Arithmetic,
        MeanKind::Geometric,
        MeanKind::Harmonic,
    ];

    pub fn code(self) -> char {
        match self {
            MeanKind::Arithmetic => 'A',
            MeanKind::Geometric => 'G',
            MeanKind::Harmonic => 'H',
        }
    }

    pub fn from_code(c: char) -> Option<MeanKind> {
        match c {
            'A' => Some(MeanKind::Arithmetic),
            'G' => Some(MeanKind::Geometric),
            'H' => Some(MeanKind::Harmonic),
            _ => None,
        }
    }
}

impl fmt::Display for MeanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

impl FromStr for MeanKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut it = s.trim().chars();
        match (it.next().and_then(MeanKind::from_code), it.next()) {
            (Some(k), None) => Ok(k),
            _ => Err(Error::Spec(format!(
                "mean kind must be A, G or H, got `{s}`"
            ))),
        }
    }
}

/// Which argument receives `h(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    FirstWeighted,
    SecondWeighted,
}

const HARMONIC_FLOOR: f64 = 1e-300;

fn check_pair(a: f64, b: f64) -> Result<()> {
    if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "means need positive arguments, got {a}, {b}"
        )))
    }
}

/// `A_t = ta + (1−t)b`, `G_t = a^t b^{1−t}`, `H_t = ab/(ta + (1−t)b)`.
pub fn classical_mean(kind: MeanKind, t: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
    }
    check_pair(a, b)?;
    Ok(match kind {
        MeanKind::Arithmetic => t * a + (1.0 - t) * b,
        MeanKind::Geometric => a.powf(t) * b.powf(1.0 - t),
        MeanKind::Harmonic => a * b / (t * a + (1.0 - t) * b),
    })
}

/// Combine `a`, `b` with weights `wa`, `wb` already taken from `h`.
pub(crate) fn weighted_pair(kind: MeanKind, wa: f64, wb: f64, a: f64, b: f64) -> Result<f64> {
    if wa + wb <= 0.0 {
        return Err(Error::DegenerateWeights(format!("h weights {wa}, {wb}")));
    }
    Ok(match kind {
        MeanKind::Arithmetic => wa * a + wb * b,
        MeanKind::Geometric => (wa * a.ln() + wb * b.ln()).exp(),
        MeanKind::Harmonic => {
            // 1/(wa/a + wb/b) without the divisions
            let den = wb * a + wa * b;
            if den < HARMONIC_FLOOR {
                return Err(Error::DegenerateWeights(format!(
                    "harmonic denominator {den}"
                )));
            }
            a * b / den
        }
    })
}

/// `A_h = h(t)a + h(1−t)b`, `G_h = a^{h(t)} b^{h(1−t)}`, `H_h = ab/(h(1−t)a + h(t)b)`
/// for `FirstWeighted`; `SecondWeighted` swaps `h(t)` and `h(1−t)`.
pub fn generalized_mean(
    kind: MeanKind,
    h: &HFunction,
    t: f64,
    a: f64,
    b: f64,
    orientation: Orientation,
) -> Result<f64> {
    check_pair(a, b)?;
    let (ht, hs) = (h.weight(t)?, h.weight(1.0 - t)?);
    let (wa, wb) = match orientation {
        Orientation::FirstWeighted => (ht, hs),
        Orientation::SecondWeighted => (hs, ht),
    };
    weighted_pair(kind, wa, wb, a, b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    weights: Vec<f64>,
    total: f64,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::DegenerateWeights(
                "at least two weights are required".into(),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::DegenerateWeights(format!(
                "weight {w} is not positive"
            )));
        }
        let total = weights.iter().sum();
        Ok(WeightVector { weights, total })
    }

    pub fn equal(n: usize) -> Result<Self> {
        WeightVector::new(vec![1.0; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `w_k / W_n`.
    pub fn normalized(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.total).collect()
    }
}

pub(crate) fn check_points(w: &WeightVector, points: &[f64]) -> Result<()> {
    if w.len() != points.len() {
        return Err(Error::LengthMismatch {
            weights: w.len(),
            points: points.len(),
        });
    }
    if let Some(x) = points.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::Domain(format!("point {x} is not positive")));
    }
    Ok(())
}

/// `Σ v_k x_k`, `Π x_k^{v_k}`, `1/Σ (v_k/x_k)` with `v_k = w_k/W_n`.
pub fn weighted_mean_n(kind: MeanKind, w: &WeightVector, points: &[f64]) -> Result<f64> {
    check_points(w, points)?;
    let v = w.normalized();
    let it = v.iter().zip(points);
    Ok(match kind {
        MeanKind::Arithmetic => it.map(|(v, x)| v * x).sum(),
        MeanKind::Geometric => it.map(|(v, x)| v * x.ln()).sum::<f64>().exp(),
        MeanKind::Harmonic => 1.0 / it.map(|(v, x)| v / x).sum::<f64>(),
    })
}

/// Sampled positive pairs on `(0.1, 10)`.
fn pair_samples(plan: &SamplePlan) -> Vec<[f64; 2]> {
    let ax = spaced(0.1, 10.0, plan.grid_per_axis, true);
    let mut out: Vec<[f64; 2]> = ax
        .iter()
        .flat_map(|&a| ax.iter().map(move |&b| [a, b]))
        .collect();
    let mut rng = plan.rng();
    let d = Interval { lo: 0.1, hi: 10.0 };
    for _ in 0..plan.random_count {
        out.push([
            plan.random_point(&d, &mut rng),
            plan.random_point(&d, &mut rng),
        ]);
    }
    out
}

type AxiomGap<'a> = Box<dyn Fn(&[f64]) -> Result<Option<Gap>> + Sync + 'a>;

/// Symmetry, reflexivity, monotonicity and homogeneity at `t = 1/2`.
pub fn check_mean_axioms(kind: MeanKind, plan: &SamplePlan) -> Result<PredicateVerdict> {
    let pts = pair_samples(plan);
    let m = |a: f64, b: f64| classical_mean(kind, 0.5, a, b);
    let tol = plan.tol;
    let lambdas = [0.3, 2.0, 7.5];
    let axioms: [(&str, AxiomGap); 4] = [
        (
            "symmetry",
            Box::new(|p: &[f64]| {
                let (u, v) = (m(p[0], p[1])?, m(p[1], p[0])?);
                Ok(Some(Gap::new((u - v).abs(), tol.allowance(u, v) - tol.abs)))
            }),
        ),
        (
            "reflexivity",
            Box::new(|p: &[f64]| {
                let u = m(p[0], p[0])?;
                Ok(Some(Gap::new(
                    (u - p[0]).abs(),
                    tol.allowance(u, p[0]) - tol.abs,
                )))
            }),
        ),
        (
            "monotonicity",
            Box::new(|p: &[f64]| {
                let (lo, hi) = (p[0].min(p[1]), p[0].max(p[1]));
                Ok(Some(Gap::new(m(lo, 1.0)?, m(hi, 1.0)?)))
            }),
        ),
        (
            "homogeneity",
            Box::new(|p: &[f64]| {
                let mut worst: Option<Gap> = None;
                for l in lambdas {
                    let (u, v) = (m(l * p[0], l * p[1])?, l * m(p[0], p[1])?);
                    let g = Gap::new((u - v).abs(), tol.allowance(u, v) - tol.abs);
                    if worst.is_none_or(|w| g.residual() < w.residual()) {
                        worst = Some(g);
                    }
                }
                Ok(worst)
            }),
        ),
    ];
    let mut out = PredicateVerdict {
        predicate: format!("mean axioms ({kind})"),
        status: PredicateStatus::Holds,
        witness: None,
        reason: None,
        samples_checked: 0,
        worst_margin: f64::INFINITY,
        details: BTreeMap::new(),
    };
    for (name, gap) in axioms.iter() {
        let v = sweep(&pts, tol, gap)?.into_predicate(*name);
        out.samples_checked += v.samples_checked;
        out.worst_margin = out.worst_margin.min(v.worst_margin);
        out.details.insert(name.to_string(), v.worst_margin);
        if !v.holds() && out.status == PredicateStatus::Holds {
            out.status = PredicateStatus::FailsAt;
            out.witness = v.witness;
            out.reason = Some(format!("{name} fails"));
        }
    }
    Ok(out)
}

/// `H_h ≤ G_h ≤ A_h` on sampled `(t, a, b)` with `a, b ∈ (0.1, 10)`.
pub fn check_am_gm_hm(h: &HFunction, plan: &SamplePlan) -> Result<PredicateVerdict> {
    let mono = check_nondecreasing(h, plan)?;
    if !mono.holds() {
        return Err(Error::HypothesisFailure(format!(
            "h is not nondecreasing on (0, 1) (witness {:?})",
            mono.witness
        )));
    }
    let ts = if h.admits_endpoints() {
        spaced(0.0, 1.0, plan.grid_per_axis, false)
    } else {
        let (a, b) = plan.shrink(&Interval::UNIT);
        spaced(a, b, plan.grid_per_axis, false)
    };
    let pairs = pair_samples(&plan.with_grid(plan.grid_per_axis.min(32)));
    let mut pts: Vec<[f64; 3]> = ts
        .iter()
        .flat_map(|&t| pairs.iter().map(move |p| [t, p[0], p[1]]))
        .collect();
    let mut rng = plan.with_seed(plan.seed ^ 0x5151).rng();
    let (ta, tb) = plan.shrink(&Interval::UNIT);
    let d = Interval { lo: 0.1, hi: 10.0 };
    for _ in 0..plan.random_count {
        let t = plan.random_point(
            &Interval {
                lo: ta - 1e-12,
                hi: tb + 1e-12,
            },
            &mut rng,
        );
        pts.push([
            t,
            plan.random_point(&d, &mut rng),
            plan.random_point(&d, &mut rng),
        ]);
    }
    let mean = |k, p: &[f64]| generalized_mean(k, h, p[0], p[1], p[2], Orientation::FirstWeighted);
    let hg = sweep(&pts, plan.tol, |p| {
        Ok(Some(Gap::new(
            mean(MeanKind::Harmonic, p)?,
            mean(MeanKind::Geometric, p)?,
        )))
    })?
    .into_predicate("H_h <= G_h");
    let ga = sweep(&pts, plan.tol, |p| {
        Ok(Some(Gap::new(
            mean(MeanKind::Geometric, p)?,
            mean(MeanKind::Arithmetic, p)?,
        )))
    })?
    .into_predicate("G_h <= A_h");
    let mut out = PredicateVerdict {
        predicate: format!("H_h <= G_h <= A_h for h = {h}"),
        status: PredicateStatus::Holds,
        witness: None,
        reason: None,
        samples_checked: hg.samples_checked,
        worst_margin: hg.worst_margin.min(ga.worst_margin),
        details: BTreeMap::new(),
    };
    out.details.insert("H_h <= G_h".into(), hg.worst_margin);
    out.details.insert("G_h <= A_h".into(), ga.worst_margin);
    for v in [hg, ga] {
        if !v.holds() && out.status == PredicateStatus::Holds {
            out.status = PredicateStatus::FailsAt;
            out.reason = Some(format!("{} fails", v.predicate));
            out.witness = v.witness;
        }
    }
    Ok(out)
}
