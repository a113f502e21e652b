//! Deterministic sampling plans.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::verdict::Tolerance;

pub const DEFAULT_SEED: u64 = 0x6D65_6176;

/// Open interval `(lo, hi)`; `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    #[serde(with = "maybe_inf")]
    pub hi: f64,
}

mod maybe_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi || lo == f64::INFINITY {
            return Err(Error::Domain(format!("invalid interval ({lo}, {hi})")));
        }
        Ok(Interval { lo, hi })
    }

    pub const POSITIVE: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
    };
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn contains_open(&self, v: f64) -> bool {
        v > self.lo && v < self.hi
    }

    pub fn contains_closed(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Result<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// `lo,hi` with `inf` accepted for the upper end.
    pub fn parse(s: &str) -> Result<Interval> {
        let bad = || Error::Spec(format!("interval must be `lo,hi`, got `{s}`"));
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let lo: f64 = a.trim().parse().map_err(|_| bad())?;
        let hi: f64 = b.trim().parse().map_err(|_| bad())?;
        Interval::new(lo, hi)
    }
}

/// Grid and random sampling parameters shared by every check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub grid_per_axis: usize,
    pub random_count: usize,
    pub seed: u64,
    /// Relative shrink applied to open intervals before sampling.
    pub epsilon_margin: f64,
    /// Finite stand-in for an infinite upper endpoint.
    pub hi_cap: f64,
    pub tol: Tolerance,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            grid_per_axis: 64,
            random_count: 256,
            seed: DEFAULT_SEED,
            epsilon_margin: 1e-6,
            hi_cap: 1e3,
            tol: Tolerance::default(),
        }
    }
}

impl SamplePlan {
    pub fn validate(&self) -> Result<()> {
        if self.grid_per_axis < 1 || self.random_count < 1 {
            return Err(Error::Spec("sample counts must be at least 1".into()));
        }
        if !(self.epsilon_margin > 0.0) || !(self.hi_cap > 0.0) {
            return Err(Error::Spec(
                "epsilon_margin and hi_cap must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn with_grid(mut self, n: usize) -> Self {
        self.grid_per_axis = n;
        self
    }

    pub fn with_random(mut self, n: usize) -> Self {
        self.random_count = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Closed sampling range `[lo+ε, hi−ε]` for an open interval.
    pub fn shrink(&self, d: &Interval) -> (f64, f64) {
        let (hi, eps) = if d.hi.is_finite() {
            (d.hi, self.epsilon_margin * (d.hi - d.lo))
        } else {
            (self.hi_cap.max(d.lo + 1.0), self.epsilon_margin)
        };
        (d.lo + eps, hi - eps)
    }

    /// Log-spaced axis when the range is positive, linear otherwise.
    pub fn point_axis(&self, d: &Interval) -> Vec<f64> {
        let (a, b) = self.shrink(d);
        spaced(a, b, self.grid_per_axis, a > 0.0)
    }

    /// One uniform random point in the shrunk interval.
    pub fn random_point(&self, d: &Interval, rng: &mut ChaCha8Rng) -> f64 {
        let (a, b) = self.shrink(d);
        rng.gen_range(a..=b)
    }
}

/// `n` points from `a` to `b` inclusive, geometrically spaced when `log`.
pub fn spaced(a: f64, b: f64, n: usize, log: bool) -> Vec<f64> {
    if n == 1 {
        return vec![if log { (a * b).sqrt() } else { 0.5 * (a + b) }];
    }
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let s = i as f64 / last;
            let v = if log {
                (a.ln() + s * (b.ln() - a.ln())).exp()
            } else {
                a + s * (b - a)
            };
            if i == 0 {
                a
            } else if i == n - 1 {
                b
            } else {
                v
            }
        })
        .collect()
}
