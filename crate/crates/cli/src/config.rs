//! Run settings: a flat `key = value` file with per-command sections, then flags.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Args;
use hmn::{Interval, SamplePlan};
use serde::{Deserialize, Serialize};

/// Keys shared by the config file and the command line. Every field is
/// optional so that a file layer and a flag layer can be merged.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Function: cosh, arcsin, exp, neg_exp, log1p, pow:<λ> or expr:<text in x>
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,

    /// Second function for compose (inner) and product
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,

    /// Weight h: id, one, recip, pow:<r> or expr:<text in t> [default: id].
    /// Repeat for chord.
    #[arg(long, global = true)]
    #[serde(
        default,
        skip_serializing_if = "Vec::is_empty",
        deserialize_with = "one_or_many"
    )]
    pub h: Vec<String>,

    /// Second weight for compose and product [default: the value of --h]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h2: Option<String>,

    /// Domain `lo,hi` of f (of g for compose; of both for product)
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,

    /// Class label such as AG (the label of f for compose)
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,

    /// Class label of g for compose
    #[arg(long = "g-label", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_label: Option<String>,

    /// convex or concave [default: convex]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,

    /// RNG seed [default: 1835360630]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Grid points per axis [default: 64]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,

    /// Random samples on top of the grid [default: 256]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random: Option<usize>,

    /// Absolute and relative tolerance [default: 1e-9]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,

    /// CSV file of `weight,point` rows, header optional
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<String>,

    /// Inline points `x1,x2,…` (equal weights) or `w1:x1,w2:x2,…`
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<String>,

    /// Lower bound m for converse [default: 0.999·min point]
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,

    /// Upper bound M for converse [default: 1.001·max point]
    #[arg(long = "M", global = true, allow_hyphen_values = true)]
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub big_m: Option<f64>,

    /// Reflection point τ for crosscheck [default: upper end of the domain]
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,

    /// Weight scale c for product and the sum bound in check-h [default: 1]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,

    /// Exponent r of h(t) = t^r for schur [default: 1]
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,

    /// Exponent λ of f(x) = x^λ for schur
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,

    /// Row count for chord [default: 101]
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

fn one_or_many<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(String),
        Many(Vec<String>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    })
}

impl Settings {
    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: Settings) -> Settings {
        macro_rules! pick {
            ($($k:ident),*) => {
                Settings { $($k: over.$k.or(self.$k),)* h: if over.h.is_empty() { self.h } else { over.h } }
            };
        }
        pick!(
            f, g, h2, domain, label, g_label, direction, seed, grid, random, tol, weights, points,
            m, big_m, tau, c, r, lambda, n
        )
    }

    pub fn plan(&self) -> Result<SamplePlan> {
        let mut plan = SamplePlan::default();
        if let Some(s) = self.seed {
            plan = plan.with_seed(s);
        }
        if let Some(g) = self.grid {
            plan = plan.with_grid(g);
        }
        if let Some(r) = self.random {
            plan = plan.with_random(r);
        }
        if let Some(t) = self.tol {
            if !(t >= 0.0 && t.is_finite()) {
                bail!("tol must be a finite non-negative number, got {t}");
            }
            plan.tol = hmn::Tolerance::uniform(t);
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn domain(&self) -> Result<Option<Interval>> {
        self.domain
            .as_deref()
            .map(|d| Interval::parse(d).map_err(Into::into))
            .transpose()
    }
}

/// Reads the file layer for `command`: top-level keys, then the `[command]`
/// section on top. Sections must name a known command.
pub fn load(path: &Path, command: &str, commands: &[&str]) -> Result<Settings> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text, command, commands).with_context(|| format!("in config {}", path.display()))
}

pub fn parse(text: &str, command: &str, commands: &[&str]) -> Result<Settings> {
    let table: toml::Table = text.parse()?;
    let mut base = toml::Table::new();
    let mut section = None;
    for (k, v) in table {
        match v {
            toml::Value::Table(t) => {
                if !commands.contains(&k.as_str()) {
                    bail!("unknown section [{k}]");
                }
                let s: Settings = t.try_into().with_context(|| format!("in section [{k}]"))?;
                if k == command {
                    section = Some(s);
                }
            }
            other => {
                base.insert(k, other);
            }
        }
    }
    let base: Settings = base.try_into()?;
    Ok(match section {
        Some(s) => base.merge(s),
        None => base,
    })
}
