//! Verdict types and the shared sampling sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Mixed absolute/relative tolerance for `u >= v` comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-9,
            rel: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn uniform(tol: f64) -> Self {
        Tolerance { abs: tol, rel: tol }
    }

    /// Slack granted when comparing `u` against `v`.
    pub fn allowance(&self, u: f64, v: f64) -> f64 {
        self.abs.max(self.rel * u.abs().max(v.abs()))
    }

    /// `u >= v` within tolerance.
    pub fn ge(&self, u: f64, v: f64) -> bool {
        u - v >= -self.allowance(u, v)
    }

    pub fn le(&self, u: f64, v: f64) -> bool {
        self.ge(v, u)
    }
}

/// Two sides of an inequality `lhs <= rhs`; the residual is `rhs - lhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub lhs: f64,
    pub rhs: f64,
}

impl Gap {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Gap { lhs, rhs }
    }

    pub fn residual(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    SupportedConvex,
    SupportedConcave,
    SupportedBoth,
    Falsified,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub min_residual: f64,
    pub max_residual: f64,
    /// Most negative residual, present when the convex direction fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Most positive residual, present when the concave direction fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concave_witness: Option<Witness>,
    pub samples: usize,
}

impl Verdict {
    pub fn indeterminate(label: impl Into<String>, reason: impl Into<String>) -> Self {
        Verdict {
            label: label.into(),
            status: Status::Indeterminate,
            reason: Some(reason.into()),
            min_residual: f64::NAN,
            max_residual: f64::NAN,
            witness: None,
            concave_witness: None,
            samples: 0,
        }
    }

    pub fn convex_supported(&self) -> bool {
        matches!(self.status, Status::SupportedConvex | Status::SupportedBoth)
    }

    pub fn concave_supported(&self) -> bool {
        matches!(
            self.status,
            Status::SupportedConcave | Status::SupportedBoth
        )
    }

    /// The convex inequality failed on at least one sample.
    pub fn convex_falsified(&self) -> bool {
        matches!(self.status, Status::SupportedConcave | Status::Falsified)
    }

    pub fn concave_falsified(&self) -> bool {
        matches!(self.status, Status::SupportedConvex | Status::Falsified)
    }

    /// Exchange the convex and concave readings.
    pub fn flipped(mut self) -> Self {
        self.status = match self.status {
            Status::SupportedConvex => Status::SupportedConcave,
            Status::SupportedConcave => Status::SupportedConvex,
            s => s,
        };
        let (lo, hi) = (self.min_residual, self.max_residual);
        self.min_residual = -hi;
        self.max_residual = -lo;
        let neg = |w: Witness| Witness {
            point: w.point,
            residual: -w.residual,
        };
        let (w, cw) = (self.witness.take(), self.concave_witness.take());
        self.witness = cw.map(neg);
        self.concave_witness = w.map(neg);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredicateStatus {
    Holds,
    FailsAt,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateVerdict {
    pub predicate: String,
    pub status: PredicateStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub samples_checked: usize,
    /// Smallest observed margin; negative beyond tolerance means failure.
    pub worst_margin: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl PredicateVerdict {
    pub fn holds(&self) -> bool {
        self.status == PredicateStatus::Holds
    }

    pub fn indeterminate(predicate: impl Into<String>, reason: impl Into<String>) -> Self {
        PredicateVerdict {
            predicate: predicate.into(),
            status: PredicateStatus::Indeterminate,
            witness: None,
            reason: Some(reason.into()),
            samples_checked: 0,
            worst_margin: f64::NAN,
            details: BTreeMap::new(),
        }
    }
}

/// Lexicographic order on sample coordinates, used to break ties.
pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Summary of a residual sweep over a sample set.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub samples: usize,
    pub skipped: usize,
    pub min: Option<Witness>,
    pub max: Option<Witness>,
    pub convex_ok: bool,
    pub concave_ok: bool,
}

/// Evaluate `gap` on every point in parallel and reduce deterministically.
///
/// `Ok(None)` from the closure marks a sample as inadmissible; it is skipped.
/// The first error in sample order aborts the sweep.
pub fn sweep<P, F>(points: &[P], tol: Tolerance, gap: F) -> Result<Sweep>
where
    P: AsRef<[f64]> + Sync,
    F: Fn(&[f64]) -> Result<Option<Gap>> + Sync,
{
    let values: Vec<Result<Option<Gap>>> = points.par_iter().map(|p| gap(p.as_ref())).collect();
    let mut out = Sweep {
        samples: 0,
        skipped: 0,
        min: None,
        max: None,
        convex_ok: true,
        concave_ok: true,
    };
    let mut min_at: Option<(f64, usize)> = None;
    let mut max_at: Option<(f64, usize)> = None;
    for (i, v) in values.into_iter().enumerate() {
        let Some(g) = v? else {
            out.skipped += 1;
            continue;
        };
        let r = g.residual();
        if !r.is_finite() {
            return Err(Error::Eval(format!(
                "non-finite residual at {:?}",
                points[i].as_ref()
            )));
        }
        out.samples += 1;
        let allow = tol.allowance(g.lhs, g.rhs);
        if r < -allow {
            out.convex_ok = false;
        }
        if r > allow {
            out.concave_ok = false;
        }
        let better_min = match min_at {
            None => true,
            Some((m, j)) => {
                r < m
                    || (r == m && lex_cmp(points[i].as_ref(), points[j].as_ref()) == Ordering::Less)
            }
        };
        if better_min {
            min_at = Some((r, i));
        }
        let better_max = match max_at {
            None => true,
            Some((m, j)) => {
                r > m
                    || (r == m && lex_cmp(points[i].as_ref(), points[j].as_ref()) == Ordering::Less)
            }
        };
        if better_max {
            max_at = Some((r, i));
        }
    }
    let wit = |(r, i): (f64, usize)| Witness {
        point: points[i].as_ref().to_vec(),
        residual: r,
    };
    out.min = min_at.map(wit);
    out.max = max_at.map(wit);
    Ok(out)
}

impl Sweep {
    pub fn into_verdict(self, label: impl Into<String>) -> Verdict {
        let label = label.into();
        if self.samples == 0 {
            return Verdict::indeterminate(label, "no admissible samples");
        }
        let status = match (self.convex_ok, self.concave_ok) {
            (true, true) => Status::SupportedBoth,
            (true, false) => Status::SupportedConvex,
            (false, true) => Status::SupportedConcave,
            (false, false) => Status::Falsified,
        };
        Verdict {
            label,
            status,
            reason: None,
            min_residual: self.min.as_ref().map_or(f64::NAN, |w| w.residual),
            max_residual: self.max.as_ref().map_or(f64::NAN, |w| w.residual),
            witness: if self.convex_ok { None } else { self.min },
            concave_witness: if self.concave_ok { None } else { self.max },
            samples: self.samples,
        }
    }

    /// Predicate reading: every sample must satisfy `lhs <= rhs`.
    pub fn into_predicate(self, predicate: impl Into<String>) -> PredicateVerdict {
        let predicate = predicate.into();
        if self.samples == 0 {
            return PredicateVerdict::indeterminate(predicate, "no admissible samples");
        }
        let worst = self.min.expect("non-empty sweep");
        PredicateVerdict {
            predicate,
            status: if self.convex_ok {
                PredicateStatus::Holds
            } else {
                PredicateStatus::FailsAt
            },
            witness: if self.convex_ok {
                None
            } else {
                Some(worst.point.clone())
            },
            reason: None,
            samples_checked: self.samples,
            worst_margin: worst.residual,
            details: BTreeMap::new(),
        }
    }
}
