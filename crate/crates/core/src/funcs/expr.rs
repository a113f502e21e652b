//! Expression language for `f` and `h`.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := unary ("^" factor)?
//! unary  := "-" unary | atom
//! atom   := NUMBER | IDENT | IDENT "(" expr ")" | IDENT "(" expr "," expr ")" | "(" expr ")"
//! ```
//!
//! Identifiers: `x`, `t`, `exp`, `log`, `sqrt`, `abs`, `cosh`, `sinh`, `arcsin`,
//! plus the two-argument `min` and `max`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Cosh,
    Sinh,
    Arcsin,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Cosh => "cosh",
            Func::Sinh => "sinh",
            Func::Arcsin => "arcsin",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "cosh" => Func::Cosh,
            "sinh" => Func::Sinh,
            "arcsin" => Func::Arcsin,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> Result<f64> {
        match self {
            Func::Exp => Ok(v.exp()),
            Func::Log if v <= 0.0 => Err(Error::Eval(format!("log of non-positive {v}"))),
            Func::Log => Ok(v.ln()),
            Func::Sqrt if v < 0.0 => Err(Error::Eval(format!("sqrt of negative {v}"))),
            Func::Sqrt => Ok(v.sqrt()),
            Func::Abs => Ok(v.abs()),
            Func::Cosh => Ok(v.cosh()),
            Func::Sinh => Ok(v.sinh()),
            Func::Arcsin if !(-1.0..=1.0).contains(&v) => {
                Err(Error::Eval(format!("arcsin outside [-1,1]: {v}")))
            }
            Func::Arcsin => Ok(v.asin()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// The free variable, remembered by name (`x` or `t`) for printing.
    Var(char),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(&["operator", "end of input"]));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, expected: &[&str]) -> Error {
        Error::Syntax {
            offset: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(&[&(c as char).to_string()]))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            _ => Err(self.syntax(&["number", "identifier", "(", "-"])),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        let digits = |p: &mut usize| {
            let b = *p;
            while *p < s.len() && s[*p].is_ascii_digit() {
                *p += 1;
            }
            *p > b
        };
        let mut p = self.pos;
        let int = digits(&mut p);
        let mut frac = false;
        if p < s.len() && s[p] == b'.' {
            p += 1;
            frac = digits(&mut p);
        }
        if !int && !frac {
            self.pos = p;
            return Err(self.syntax(&["digit"]));
        }
        if p < s.len() && (s[p] == b'e' || s[p] == b'E') {
            let mut q = p + 1;
            if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
                q += 1;
            }
            if !digits(&mut q) {
                self.pos = q;
                return Err(self.syntax(&["exponent digits"]));
            }
            p = q;
        }
        self.pos = p;
        let text = std::str::from_utf8(&s[start..p]).expect("ascii");
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Syntax {
                offset: start,
                expected: vec!["number".into()],
            })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match name {
            "x" | "t" => return Ok(Expr::Var(name.chars().next().unwrap())),
            "min" | "max" => {
                let op = if name == "min" {
                    BinOp::Min
                } else {
                    BinOp::Max
                };
                self.expect(b'(')?;
                let a = self.expr()?;
                self.expect(b',')?;
                let b = self.expr()?;
                self.expect(b')')?;
                return Ok(Expr::Bin(op, Box::new(a), Box::new(b)));
            }
            _ => {}
        }
        let Some(func) = Func::from_name(name) else {
            return Err(Error::UnknownIdentifier {
                name: name.to_string(),
                offset: start,
            });
        };
        self.expect(b'(')?;
        let arg = self.expr()?;
        self.expect(b')')?;
        Ok(Expr::Call(func, Box::new(arg)))
    }
}

fn power(b: f64, e: f64) -> Result<f64> {
    if b < 0.0 && e.fract() != 0.0 {
        return Err(Error::Eval(format!(
            "non-integer power {e} of negative base {b}"
        )));
    }
    if b == 0.0 && e < 0.0 {
        return Err(Error::Eval(format!("zero raised to negative power {e}")));
    }
    Ok(b.powf(e))
}

impl Expr {
    pub fn var(name: char) -> Expr {
        Expr::Var(name)
    }

    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    /// Evaluate with the free variable bound to `v`.
    pub fn eval(&self, v: f64) -> Result<f64> {
        let out = match self {
            Expr::Num(c) => *c,
            Expr::Var(_) => v,
            Expr::Neg(a) => -a.eval(v)?,
            Expr::Call(f, a) => f.apply(a.eval(v)?)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(v)?, b.eval(v)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b == 0.0 => return Err(Error::Eval("division by zero".into())),
                    BinOp::Div => a / b,
                    BinOp::Pow => power(a, b)?,
                    BinOp::Min => a.min(b),
                    BinOp::Max => a.max(b),
                }
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::Eval(format!("non-finite value in `{self}` at {v}")))
        }
    }

    /// Replace every occurrence of the free variable by `inner`.
    pub fn substitute(&self, inner: &Expr) -> Expr {
        match self {
            Expr::Num(c) => Expr::Num(*c),
            Expr::Var(_) => inner.clone(),
            Expr::Neg(a) => Expr::neg(a.substitute(inner)),
            Expr::Call(f, a) => Expr::call(*f, a.substitute(inner)),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.substitute(inner), b.substitute(inner)),
        }
    }

    /// Rename the free variable (e.g. `t` to `x`).
    pub fn with_var(&self, name: char) -> Expr {
        self.substitute(&Expr::Var(name))
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized rendering that reparses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) if c.is_sign_negative() => write!(f, "(-{:?})", -c),
            Expr::Num(c) => write!(f, "{c:?}"),
            Expr::Var(n) => write!(f, "{n}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(BinOp::Min, a, b) => write!(f, "min({a}, {b})"),
            Expr::Bin(BinOp::Max, a, b) => write!(f, "max({a}, {b})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                    BinOp::Min | BinOp::Max => unreachable!(),
                };
                write!(f, "({a} {s} {b})")
            }
        }
    }
}
