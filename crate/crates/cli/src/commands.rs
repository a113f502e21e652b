//! One function per subcommand; each returns the `result` part of the report.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use hmn::algebra::{
    self, composition_table, functional_inequality_check, product_rule, verify_composition,
    Direction, FunctionalFamily,
};
use hmn::classes::{check_class, check_midconvex, classify_all, ClassMatrix};
use hmn::funcs::emit_chord_data;
use hmn::hfun::{self, IdentityBound, SumBound};
use hmn::jensen::{jensen_chain_check, jensen_eval_with};
use hmn::means::{check_am_gm_hm, check_mean_axioms};
use hmn::pointwise::{schur_check, three_point_check};
use hmn::transforms::{cross_check, default_tau};
use hmn::{
    ClassLabel, HFunction, Interval, MeanKind, PredicateVerdict, SamplePlan, ScalarFn, WeightVector,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Settings;
use crate::points;
use crate::Command;

#[derive(Serialize)]
pub struct Envelope<'a> {
    pub command: &'a str,
    pub config: &'a Settings,
    pub result: Value,
}

pub fn dispatch(cmd: Command, s: &Settings, csv: Option<&Path>) -> Result<Value> {
    let plan = s.plan()?;
    if csv.is_some() && !matches!(cmd, Command::Classify | Command::Chord) {
        bail!("--csv applies to classify and chord only");
    }
    let v = match cmd {
        Command::Classify => {
            let m = classify_all(&function(s)?, &weight(s)?, &plan)?;
            if let Some(p) = csv {
                write(p, &matrix_csv(&m)?)?;
            }
            to_value(&m)?
        }
        Command::Check => to_value(&check_class(label(s)?, &function(s)?, &weight(s)?, &plan)?)?,
        Command::Midconvex => to_value(&check_midconvex(&function(s)?, &weight(s)?, &plan)?)?,
        Command::Crosscheck => crosscheck(s, &plan)?,
        Command::Schur => {
            let r = s.r.unwrap_or(1.0);
            let lambda = s.lambda.ok_or_else(|| anyhow!("schur needs --lambda"))?;
            to_value(&schur_check(label(s)?, r, lambda, &plan)?)?
        }
        Command::ThreePoint => to_value(&three_point_check(
            label(s)?,
            &function(s)?,
            &weight(s)?,
            direction(s)?,
            &plan,
        )?)?,
        Command::Compose => compose(s, &plan)?,
        Command::Product => product(s, &plan)?,
        Command::Functional => {
            let fam: FunctionalFamily = required(&s.label, "label")?.parse()?;
            to_value(&functional_inequality_check(
                fam,
                &function(s)?,
                &weight(s)?,
                direction(s)?,
                &plan,
            )?)?
        }
        Command::Jensen => {
            let (w, x) = weights_points(s)?;
            to_value(&jensen_eval_with(
                label(s)?,
                &function(s)?,
                &weight(s)?,
                &w,
                &x,
                &plan,
            )?)?
        }
        Command::Converse => {
            let (w, x) = weights_points(s)?;
            to_value(&jensen_chain_check(
                label(s)?,
                &function(s)?,
                &weight(s)?,
                &w,
                &x,
                s.m,
                s.big_m,
                &plan,
            )?)?
        }
        Command::Axioms => axioms(s, &plan)?,
        Command::Chord => chord(s, csv)?,
        Command::CheckH => check_h(s, &plan)?,
    };
    Ok(v)
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn required<'a>(v: &'a Option<String>, key: &str) -> Result<&'a str> {
    v.as_deref().ok_or_else(|| anyhow!("missing --{key}"))
}

fn parse_fn(spec: &str, s: &Settings) -> Result<ScalarFn> {
    let f = ScalarFn::parse(spec)?;
    Ok(match s.domain()? {
        Some(d) => f.on(d),
        None => f,
    })
}

fn function(s: &Settings) -> Result<ScalarFn> {
    parse_fn(required(&s.f, "f")?, s)
}

fn weight(s: &Settings) -> Result<HFunction> {
    match s.h.as_slice() {
        [] => Ok(HFunction::identity()),
        [one] => Ok(HFunction::parse(one)?),
        _ => bail!("--h given more than once; only chord takes several"),
    }
}

fn weight2(s: &Settings) -> Result<HFunction> {
    match &s.h2 {
        Some(h) => Ok(HFunction::parse(h)?),
        None => weight(s),
    }
}

fn label(s: &Settings) -> Result<ClassLabel> {
    Ok(required(&s.label, "label")?.parse()?)
}

fn direction(s: &Settings) -> Result<Direction> {
    match s.direction.as_deref().unwrap_or("convex") {
        "convex" => Ok(Direction::Convex),
        "concave" => Ok(Direction::Concave),
        d => bail!("direction must be convex or concave, got `{d}`"),
    }
}

fn weights_points(s: &Settings) -> Result<(WeightVector, Vec<f64>)> {
    let (w, x) = match (&s.weights, &s.points) {
        (Some(_), Some(_)) => bail!("give either --weights or --points, not both"),
        (Some(p), None) => points::read_csv(Path::new(p))?,
        (None, Some(inline)) => points::parse_inline(inline)?,
        (None, None) => bail!("missing --weights or --points"),
    };
    Ok((WeightVector::new(w)?, x))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn matrix_csv(m: &ClassMatrix) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "status", "min_residual", "max_residual", "samples"])?;
    for (l, v) in ClassLabel::all().iter().zip(&m.verdicts) {
        w.write_record([
            l.to_string(),
            serde_json::to_value(v.status)?
                .as_str()
                .unwrap_or_default()
                .to_string(),
            hmn::funcs::fmt_g17(v.min_residual),
            hmn::funcs::fmt_g17(v.max_residual),
            v.samples.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn crosscheck(s: &Settings, plan: &SamplePlan) -> Result<Value> {
    let f = function(s)?;
    let h = weight(s)?;
    let tau = match s.tau {
        Some(t) => t,
        None => default_tau(&f)?,
    };
    let labels = match &s.label {
        Some(l) => vec![l.parse()?],
        None => ClassLabel::all().to_vec(),
    };
    let checks = labels
        .into_iter()
        .map(|l| cross_check(l, &f, &h, tau, plan))
        .collect::<hmn::Result<Vec<_>>>()?;
    let disagreements = checks.iter().filter(|c| !c.agree).count();
    Ok(json!({ "tau": tau, "disagreements": disagreements, "checks": checks }))
}

fn compose(s: &Settings, plan: &SamplePlan) -> Result<Value> {
    // --domain belongs to g; f is sampled only on the range of g
    let g = parse_fn(required(&s.g, "g")?, s)?;
    let f = ScalarFn::parse(required(&s.f, "f")?)?.on(sampled_range(&g, plan)?);
    let fl = label(s)?;
    let gl: ClassLabel = required(&s.g_label, "g-label")?.parse()?;
    let report = verify_composition(&f, &g, fl, gl, &weight(s)?, &weight2(s)?, plan)?;
    let table_size = composition_table().len();
    Ok(json!({ "table_rows": table_size, "report": report }))
}

/// `[min g, max g]` over the grid and random points, widened by a relative 1e-6.
fn sampled_range(g: &ScalarFn, plan: &SamplePlan) -> Result<Interval> {
    let mut xs = plan.point_axis(&g.domain);
    let mut rng = plan.rng();
    xs.extend((0..plan.random_count).map(|_| plan.random_point(&g.domain, &mut rng)));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in xs {
        let v = g.eval(x)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(Interval::new(lo - 1e-6 * lo.abs(), hi + 1e-6 * hi.abs())?)
}

fn product(s: &Settings, plan: &SamplePlan) -> Result<Value> {
    let f = function(s)?;
    let g = parse_fn(required(&s.g, "g")?, s)?;
    let l = label(s)?;
    let c = s.c.unwrap_or(1.0);
    let ordering = algebra::check_ordering(&f, &g, plan)?;
    let v = product_rule(
        &f,
        &g,
        l.n,
        l.m,
        &weight(s)?,
        &weight2(s)?,
        c,
        direction(s)?,
        plan,
    )?;
    Ok(json!({ "ordering": ordering, "verdict": v }))
}

fn axioms(s: &Settings, plan: &SamplePlan) -> Result<Value> {
    let h = weight(s)?;
    let means = MeanKind::ALL
        .iter()
        .map(|k| Ok(json!({ "mean": k, "axioms": check_mean_axioms(*k, plan)? })))
        .collect::<Result<Vec<_>>>()?;
    // a decreasing h is a finding about h, not a failed run
    let chain = match check_am_gm_hm(&h, plan) {
        Ok(v) => v,
        Err(e @ hmn::Error::HypothesisFailure(_)) => {
            PredicateVerdict::indeterminate("H_h <= G_h <= A_h", e.to_string())
        }
        Err(e) => return Err(e.into()),
    };
    Ok(json!({ "h": h, "means": means, "am_gm_hm": chain }))
}

fn chord(s: &Settings, csv: Option<&Path>) -> Result<Value> {
    let f = function(s)?;
    let hs = if s.h.is_empty() {
        vec![HFunction::identity()]
    } else {
        s.h.iter()
            .map(|h| HFunction::parse(h))
            .collect::<hmn::Result<Vec<_>>>()?
    };
    let d = s.domain()?.unwrap_or(f.domain);
    if !d.hi.is_finite() {
        bail!("chord needs a bounded --domain");
    }
    let table = emit_chord_data(&f, &hs, d.lo, d.hi, s.n.unwrap_or(101))?;
    if let Some(p) = csv {
        write(p, &table.to_csv())?;
    }
    to_value(&table)
}

fn check_h(s: &Settings, plan: &SamplePlan) -> Result<Value> {
    let h = weight(s)?;
    let c = s.c.unwrap_or(1.0);
    let checks = vec![
        hfun::check_nondecreasing(&h, plan)?,
        hfun::check_supermultiplicative(&h, plan)?,
        hfun::check_submultiplicative(&h, plan)?,
        hfun::check_dominates_identity(&h, IdentityBound::AboveId, plan)?,
        hfun::check_dominates_identity(&h, IdentityBound::BelowId, plan)?,
        hfun::check_control_function(&h, plan)?,
        hfun::check_symmetric_sum_bound(&h, c, SumBound::AtMost, plan)?,
        hfun::check_symmetric_sum_bound(&h, c, SumBound::AtLeast, plan)?,
    ];
    Ok(json!({ "h": h, "c": c, "predicates": checks }))
}
