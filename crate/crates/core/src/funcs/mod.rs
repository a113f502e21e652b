//! Candidate functions `f`, the h-chord and chord data export.

pub mod expr;
pub mod plan;

use serde::{Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};
use crate::hfun::HFunction;
pub use expr::{parse_expr, BinOp, Expr, Func};
pub use plan::{Interval, SamplePlan};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltIn {
    Cosh,
    Arcsin,
    Exp,
    NegExp,
    Log1p,
    Pow(f64),
}

impl BuiltIn {
    fn eval(self, x: f64) -> f64 {
        match self {
            BuiltIn::Cosh => x.cosh(),
            BuiltIn::Arcsin => x.asin(),
            BuiltIn::Exp => x.exp(),
            BuiltIn::NegExp => (-x).exp(),
            BuiltIn::Log1p => x.ln_1p(),
            BuiltIn::Pow(l) => x.powf(l),
        }
    }

    fn to_expr(self) -> Expr {
        let x = Expr::var('x');
        match self {
            BuiltIn::Cosh => Expr::call(Func::Cosh, x),
            BuiltIn::Arcsin => Expr::call(Func::Arcsin, x),
            BuiltIn::Exp => Expr::call(Func::Exp, x),
            BuiltIn::NegExp => Expr::call(Func::Exp, Expr::neg(x)),
            BuiltIn::Log1p => Expr::call(Func::Log, Expr::bin(BinOp::Add, Expr::num(1.0), x)),
            BuiltIn::Pow(l) => Expr::bin(BinOp::Pow, x, Expr::num(l)),
        }
    }

    fn natural_domain(self) -> Interval {
        match self {
            BuiltIn::Arcsin => Interval::UNIT,
            _ => Interval::POSITIVE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    BuiltIn(BuiltIn),
    Expression(Expr),
}

/// A real function on an open interval of the positive axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFn {
    pub body: Body,
    pub domain: Interval,
}

impl ScalarFn {
    pub fn builtin(b: BuiltIn) -> Self {
        ScalarFn {
            domain: b.natural_domain(),
            body: Body::BuiltIn(b),
        }
    }

    pub fn expression(e: Expr, domain: Interval) -> Self {
        ScalarFn {
            body: Body::Expression(e.with_var('x')),
            domain,
        }
    }

    /// Accepts `cosh`, `arcsin`, `exp`, `neg_exp`, `log1p`, `pow:<λ>` and `expr:<text>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let b = match spec {
            "cosh" => BuiltIn::Cosh,
            "arcsin" => BuiltIn::Arcsin,
            "exp" => BuiltIn::Exp,
            "neg_exp" => BuiltIn::NegExp,
            "log1p" => BuiltIn::Log1p,
            _ => {
                if let Some(r) = spec.strip_prefix("pow:") {
                    let l: f64 = r
                        .trim()
                        .parse()
                        .map_err(|_| Error::Spec(format!("bad exponent in `{spec}`")))?;
                    if !l.is_finite() {
                        return Err(Error::Spec(format!("bad exponent in `{spec}`")));
                    }
                    BuiltIn::Pow(l)
                } else if let Some(text) = spec.strip_prefix("expr:") {
                    return Ok(ScalarFn::expression(parse_expr(text)?, Interval::POSITIVE));
                } else {
                    return Err(Error::Spec(format!("unknown function `{spec}`")));
                }
            }
        };
        Ok(ScalarFn::builtin(b))
    }

    pub fn on(mut self, domain: Interval) -> Self {
        self.domain = domain;
        self
    }

    pub fn to_expr(&self) -> Expr {
        match &self.body {
            Body::BuiltIn(b) => b.to_expr(),
            Body::Expression(e) => e.clone(),
        }
    }

    /// Evaluate at `x` in the closed domain.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.domain.contains_closed(x) {
            return Err(Error::Domain(format!(
                "{x} outside domain ({}, {}) of {self}",
                self.domain.lo, self.domain.hi
            )));
        }
        let v = match &self.body {
            Body::BuiltIn(b) => b.eval(x),
            Body::Expression(e) => e.eval(x)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Eval(format!("{self} is not finite at {x}")))
        }
    }

    /// Evaluate and require a strictly positive value.
    pub fn eval_positive(&self, x: f64) -> Result<f64> {
        let v = self.eval(x)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::PositivityFailure { at: x, value: v })
        }
    }

    /// `self ∘ inner` on `inner`'s domain.
    pub fn compose(&self, inner: &ScalarFn) -> ScalarFn {
        ScalarFn::expression(self.to_expr().substitute(&inner.to_expr()), inner.domain)
    }

    /// Pointwise combination on the common domain.
    pub fn combine(&self, op: BinOp, other: &ScalarFn) -> Result<ScalarFn> {
        let d = self.domain.intersect(&other.domain)?;
        Ok(ScalarFn::expression(
            Expr::bin(op, self.to_expr(), other.to_expr()),
            d,
        ))
    }

    pub fn scaled(&self, c: f64) -> ScalarFn {
        ScalarFn::expression(
            Expr::bin(BinOp::Mul, Expr::num(c), self.to_expr()),
            self.domain,
        )
    }

    /// Whether the function is sampled-nondecreasing on its shrunk domain.
    pub fn monotone_increasing(&self, plan: &SamplePlan, n: usize) -> Result<bool> {
        let (a, b) = plan.shrink(&self.domain);
        let xs = plan::spaced(a, b, n.max(2), a > 0.0);
        let mut prev = self.eval(xs[0])?;
        for &x in &xs[1..] {
            let v = self.eval(x)?;
            if !plan.tol.ge(v, prev) {
                return Ok(false);
            }
            prev = v;
        }
        Ok(true)
    }

    pub fn spec(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            Body::BuiltIn(BuiltIn::Cosh) => write!(f, "cosh"),
            Body::BuiltIn(BuiltIn::Arcsin) => write!(f, "arcsin"),
            Body::BuiltIn(BuiltIn::Exp) => write!(f, "exp"),
            Body::BuiltIn(BuiltIn::NegExp) => write!(f, "neg_exp"),
            Body::BuiltIn(BuiltIn::Log1p) => write!(f, "log1p"),
            Body::BuiltIn(BuiltIn::Pow(l)) => write!(f, "pow:{l}"),
            Body::Expression(e) => write!(f, "expr:{e}"),
        }
    }
}

impl Serialize for ScalarFn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `L(t; h) = [f(y) − f(x)]·h((t − x)/(y − x)) + f(x)`.
pub fn h_chord(f: &ScalarFn, h: &HFunction, x: f64, y: f64, t: f64) -> Result<f64> {
    if !(x < y) {
        return Err(Error::Domain(format!("chord needs x < y, got {x}, {y}")));
    }
    if !(x..=y).contains(&t) {
        return Err(Error::Domain(format!("{t} outside [{x}, {y}]")));
    }
    let (fx, fy) = (f.eval(x)?, f.eval(y)?);
    let s = ((t - x) / (y - x)).clamp(0.0, 1.0);
    Ok((fy - fx) * h.weight(s)? + fx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChordTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ChordTable {
    /// Header cells are quoted when an h-spec contains commas.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let write = |w: &mut csv::Writer<Vec<u8>>| -> csv::Result<()> {
            w.write_record(&self.header)?;
            for row in &self.rows {
                w.write_record(row.iter().map(|v| fmt_g17(*v)))?;
            }
            w.flush()?;
            Ok(())
        };
        write(&mut w).expect("writing to memory");
        String::from_utf8(w.into_inner().expect("in-memory buffer")).expect("utf-8 cells")
    }
}

/// Rows `(t, f(t), L(t; h_1), …)` at `n` equally spaced `t` in `[x, y]`.
pub fn emit_chord_data(
    f: &ScalarFn,
    hs: &[HFunction],
    x: f64,
    y: f64,
    n: usize,
) -> Result<ChordTable> {
    if n < 2 {
        return Err(Error::Spec("chord data needs at least 2 rows".into()));
    }
    let mut header = vec!["t".to_string(), "f".to_string()];
    header.extend(hs.iter().map(|h| format!("L[{h}]")));
    let rows = plan::spaced(x, y, n, false)
        .into_iter()
        .map(|t| {
            let mut row = vec![t, f.eval(t)?];
            for h in hs {
                row.push(h_chord(f, h, x, y, t)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChordTable { header, rows })
}

/// C `%.17g` formatting.
pub fn fmt_g17(v: f64) -> String {
    const P: i32 = 17;
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..P).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mant), sign, exp.abs())
    } else {
        trim(&format!("{:.*}", (P - 1 - exp) as usize, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn f(spec: &str) -> ScalarFn {
        ScalarFn::parse(spec).unwrap()
    }

    #[test]
    fn builtin_values() {
        assert_eq!(f("cosh").eval(0.0).unwrap(), 1.0);
        assert_relative_eq!(f("arcsin").eval(1.0).unwrap(), std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(f("pow:-1").eval(0.2).unwrap(), 5.0, max_relative = 1e-15);
        assert!(matches!(f("arcsin").eval(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn builtins_agree_with_their_expressions() {
        for spec in [
            "cosh", "arcsin", "exp", "neg_exp", "log1p", "pow:1.5", "pow:-2",
        ] {
            let g = f(spec);
            let e = g.to_expr();
            for x in [0.05, 0.3, 0.7, 0.95] {
                assert_relative_eq!(g.eval(x).unwrap(), e.eval(x).unwrap(), max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn positivity_is_reported() {
        let g = f("expr:x - 1");
        assert!(matches!(
            g.eval_positive(0.5),
            Err(Error::PositivityFailure { .. })
        ));
    }

    #[test]
    fn chord_examples() {
        let sq = f("pow:2");
        let id = HFunction::identity();
        assert_relative_eq!(
            h_chord(&sq, &id, 0.1, 0.9, 0.5).unwrap(),
            0.41,
            max_relative = 1e-14
        );
        let h = HFunction::parse("pow:0.5").unwrap();
        assert_eq!(h_chord(&f("exp"), &h, 0.2, 0.8, 0.2).unwrap(), 0.2f64.exp());
        let c = f("expr:3");
        assert_eq!(
            h_chord(&c, &HFunction::parse("one").unwrap(), 0.2, 0.8, 0.4).unwrap(),
            3.0
        );
    }

    #[test]
    fn identity_chord_is_the_secant() {
        let e = f("exp");
        let id = HFunction::identity();
        let (x, y) = (0.0f64, 1.0f64);
        let slope = (y.exp() - x.exp()) / (y - x);
        let worst = plan::spaced(x, y, 1001, false)
            .into_iter()
            .map(|t| (h_chord(&e, &id, x, y, t).unwrap() - (slope * (t - x) + x.exp())).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn chord_table_shapes() {
        let sq = f("pow:2");
        let hs: Vec<HFunction> = ["pow:0.5", "id", "pow:1.5"]
            .iter()
            .map(|s| HFunction::parse(s).unwrap())
            .collect();
        let eps = 1e-6;
        let t = emit_chord_data(&sq, &hs, eps, 1.0 - eps, 101).unwrap();
        assert_eq!(t.rows.len(), 101);
        assert!(t.rows.iter().all(|r| r.len() == 5));
        let two = emit_chord_data(&sq, &hs, 0.2, 0.6, 2).unwrap();
        assert_eq!(
            two.rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
            vec![0.2, 0.6]
        );
        let bare = emit_chord_data(&sq, &[], 0.2, 0.6, 3).unwrap();
        assert!(bare.rows.iter().all(|r| r.len() == 2));
        let csv = bare.to_csv();
        assert!(
            csv.starts_with("t,f\n0.20000000000000001,0.040000000000000008\n"),
            "{csv}"
        );
    }

    #[test]
    fn chord_header_quotes_commas() {
        let h = HFunction::parse("expr:min(t, 1)").unwrap();
        let csv = emit_chord_data(&f("pow:2"), &[h], 0.2, 0.6, 2)
            .unwrap()
            .to_csv();
        let header = csv.lines().next().unwrap();
        assert!(header.starts_with("t,f,\""), "{header}");
        let cells: Vec<csv::StringRecord> = csv::Reader::from_reader(csv.as_bytes())
            .records()
            .collect::<std::result::Result<_, _>>()
            .unwrap();
        assert!(cells.iter().all(|r| r.len() == 3));
    }

    #[test]
    fn g17_matches_c_printf() {
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(100.0), "100");
        assert_eq!(fmt_g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(0.0001), "0.0001");
    }

    proptest! {
        #[test]
        fn g17_round_trips(v in proptest::num::f64::NORMAL) {
            prop_assert_eq!(fmt_g17(v).parse::<f64>().unwrap(), v);
        }

        #[test]
        fn power_builtin_is_positive(x in 1e-6f64..1e6, l in -8.0f64..8.0) {
            prop_assert!(ScalarFn::builtin(BuiltIn::Pow(l)).eval(x).unwrap() > 0.0);
        }
    }
}
