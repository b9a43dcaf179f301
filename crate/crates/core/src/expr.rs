//! A small expression language for transcribing printed formulas.
//!
//! Grammar (juxtaposition is multiplication, `a/b` only with a numeric `b`):
//!
//! ```text
//! sum     := ['+'|'-'] product (('+'|'-') product)*
//! product := power (['*'] power | '/' number)*
//! power   := atom ['^' integer]
//! atom    := number | ident | ident '(' sum ')' | '(' sum ')'
//! ```

use std::fmt;

use thiserror::Error;

use crate::scalars::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("expression error at byte {pos}: {msg}")]
pub struct ExprError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Rational),
    Var(String),
    Call(String, Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Rational),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let mut out = Vec::new();
    let bytes: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = bytes[start..i].iter().collect();
            let v = text.parse::<i64>().map_err(|_| ExprError { pos: start, msg: "integer overflow".into() })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(bytes[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ExprError { pos: i, msg: format!("unexpected character {c:?}") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.len)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError { pos: self.here(), msg: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = if self.eat('-') {
            Expr::Neg(Box::new(self.product()?))
        } else {
            self.eat('+');
            self.product()?
        };
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Sym('(')))
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.power()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else if self.eat('/') {
                match self.peek().cloned() {
                    Some(Tok::Num(d)) => {
                        self.pos += 1;
                        if d == 0 {
                            return self.err("division by zero");
                        }
                        lhs = Expr::Div(Box::new(lhs), Rational::from_int(d));
                    }
                    _ => return self.err("only division by an integer literal is supported"),
                }
            } else if self.starts_atom() {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.peek().cloned() {
                Some(Tok::Num(e)) if e >= 0 => {
                    self.pos += 1;
                    Ok(Expr::Pow(Box::new(base), e as u32))
                }
                _ => self.err("exponent must be a nonnegative integer"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(Rational::from_int(v)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let inner = self.sum()?;
                    if !self.eat(')') {
                        return self.err("expected ')'");
                    }
                    Ok(Expr::Call(name, Box::new(inner)))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(inner)
            }
            _ => self.err("expected a number, name or '('"),
        }
    }
}

pub fn parse(s: &str) -> Result<Expr, ExprError> {
    let toks = tokenize(s)?;
    let mut p = Parser { toks, pos: 0, len: s.len() };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Target algebra for [`Expr::eval`].
pub trait ExprAlgebra: Sized + Clone {
    type Error: From<ExprError>;
    fn from_rational(&self, r: &Rational) -> Self;
    fn var(&self, name: &str) -> Result<Self, Self::Error>;
    fn call(&self, name: &str, arg: &Expr) -> Result<Self, Self::Error>;
    fn add(&self, other: &Self) -> Result<Self, Self::Error>;
    fn sub(&self, other: &Self) -> Result<Self, Self::Error>;
    fn mul(&self, other: &Self) -> Result<Self, Self::Error>;
    fn neg(&self) -> Self;
    fn scale(&self, r: &Rational) -> Self;
    fn one(&self) -> Self {
        self.from_rational(&Rational::one())
    }
}

impl Expr {
    /// Evaluates in an algebra; `ctx` is any value of the target type used to
    /// build constants (it carries e.g. the variable count).
    pub fn eval<A: ExprAlgebra>(&self, ctx: &A) -> Result<A, A::Error> {
        Ok(match self {
            Expr::Num(r) => ctx.from_rational(r),
            Expr::Var(name) => ctx.var(name)?,
            Expr::Call(name, arg) => ctx.call(name, arg)?,
            Expr::Neg(e) => e.eval(ctx)?.neg(),
            Expr::Add(a, b) => a.eval(ctx)?.add(&b.eval(ctx)?)?,
            Expr::Sub(a, b) => a.eval(ctx)?.sub(&b.eval(ctx)?)?,
            Expr::Mul(a, b) => a.eval(ctx)?.mul(&b.eval(ctx)?)?,
            Expr::Div(a, d) => a.eval(ctx)?.scale(&Rational::one().checked_div(d).map_err(|_| {
                ExprError { pos: 0, msg: "division by zero".into() }
            })?),
            Expr::Pow(a, k) => {
                let base = a.eval(ctx)?;
                let mut acc = ctx.one();
                for _ in 0..*k {
                    acc = acc.mul(&base)?;
                }
                acc
            }
        })
    }

    /// Evaluates an expression that must be an integer linear form in the
    /// given variable names, e.g. `x1-x3` or `x+y`.
    pub fn linear_form(&self, vars: &[&str]) -> Result<Vec<i64>, ExprError> {
        let bad = |m: &str| ExprError { pos: 0, msg: m.to_string() };
        let int = |r: &Rational| -> Result<i64, ExprError> {
            if !r.is_integer() {
                return Err(bad("non-integer coefficient in argument"));
            }
            i64::try_from(r.numerator().clone()).map_err(|_| bad("argument coefficient too large"))
        };
        // (constant, coefficients)
        fn go(e: &Expr, vars: &[&str]) -> Result<(Rational, Vec<Rational>), ExprError> {
            let bad = |m: &str| ExprError { pos: 0, msg: m.to_string() };
            let n = vars.len();
            Ok(match e {
                Expr::Num(r) => (r.clone(), vec![Rational::zero(); n]),
                Expr::Var(v) => {
                    let i = vars.iter().position(|x| x == v).ok_or_else(|| bad("unknown variable in argument"))?;
                    let mut c = vec![Rational::zero(); n];
                    c[i] = Rational::one();
                    (Rational::zero(), c)
                }
                Expr::Neg(a) => {
                    let (k, c) = go(a, vars)?;
                    (-k, c.into_iter().map(|x| -x).collect())
                }
                Expr::Add(a, b) | Expr::Sub(a, b) => {
                    let (ka, ca) = go(a, vars)?;
                    let (kb, cb) = go(b, vars)?;
                    let s = matches!(e, Expr::Sub(..));
                    let comb = |x: Rational, y: Rational| if s { x - y } else { x + y };
                    (comb(ka, kb), ca.into_iter().zip(cb).map(|(x, y)| comb(x, y)).collect())
                }
                Expr::Mul(a, b) => {
                    let (ka, ca) = go(a, vars)?;
                    let (kb, cb) = go(b, vars)?;
                    if ca.iter().all(Rational::is_zero) {
                        (&ka * &kb, cb.into_iter().map(|x| &ka * &x).collect())
                    } else if cb.iter().all(Rational::is_zero) {
                        (&ka * &kb, ca.into_iter().map(|x| &kb * &x).collect())
                    } else {
                        return Err(bad("argument is not linear"));
                    }
                }
                _ => return Err(bad("unsupported construct in argument")),
            })
        }
        let (k, c) = go(self, vars)?;
        if !k.is_zero() {
            return Err(bad("argument has a constant term"));
        }
        c.iter().map(int).collect()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numerator())
                } else {
                    write!(f, "{r}")
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Call(n, a) => write!(f, "{n}({a})"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Div(a, d) => write!(f, "{a}/{}", d.numerator()),
            Expr::Pow(a, k) => write!(f, "{a}^{k}"),
        }
    }
}
