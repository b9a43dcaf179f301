//! Commutative polynomials in named integrals and the invariants g2, g3.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::expr::{self, Expr, ExprAlgebra, ExprError};
use crate::grading::WeightedDegree;
use crate::scalars::Rational;

pub const POLY_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("generator lists differ: {0:?} vs {1:?}")]
    GeneratorMismatch(Vec<String>, Vec<String>),
    #[error("duplicate generator {0:?}")]
    DuplicateGenerator(String),
    #[error("odd power of {0} survives the substitution")]
    OddPower(String),
    #[error("malformed polynomial text: {0}")]
    Parse(String),
}

/// Sparse polynomial over the rationals; exponent vectors follow
/// `generators`, terms are kept in ascending exponent order with no zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct AbstractIntegralPoly {
    generators: Vec<String>,
    terms: BTreeMap<Vec<u32>, Rational>,
}

/// Image of a generator under [`AbstractIntegralPoly::substitute`].
#[derive(Debug, Clone)]
pub enum Image {
    Poly(AbstractIntegralPoly),
    /// Only even powers are allowed; `g^2` maps to the polynomial.
    Square(AbstractIntegralPoly),
}

/// One line of a term-level comparison.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TermDiff {
    pub monomial: String,
    pub expected: String,
    pub derived: String,
}

impl AbstractIntegralPoly {
    pub fn zero(generators: &[&str]) -> Result<Self, PolyError> {
        let mut seen = Vec::<String>::new();
        for g in generators {
            if seen.iter().any(|s| s == g) {
                return Err(PolyError::DuplicateGenerator(g.to_string()));
            }
            seen.push(g.to_string());
        }
        Ok(AbstractIntegralPoly { generators: seen, terms: BTreeMap::new() })
    }

    fn empty_like(&self) -> Self {
        AbstractIntegralPoly { generators: self.generators.clone(), terms: BTreeMap::new() }
    }

    pub fn constant_like(&self, c: Rational) -> Self {
        let mut p = self.empty_like();
        p.add_term(vec![0; self.generators.len()], c);
        p
    }

    pub fn generator(generators: &[&str], name: &str) -> Result<Self, PolyError> {
        let mut p = Self::zero(generators)?;
        let i = p.index_of(name)?;
        let mut e = vec![0; generators.len()];
        e[i] = 1;
        p.add_term(e, Rational::one());
        Ok(p)
    }

    pub fn from_terms(
        generators: &[&str],
        terms: impl IntoIterator<Item = (Vec<u32>, Rational)>,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(generators)?;
        for (e, c) in terms {
            if e.len() != generators.len() {
                return Err(PolyError::Parse(format!("exponent vector {e:?} has wrong length")));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// Parses an expression; `defs` supplies named sub-polynomials (e.g. X, Y)
    /// over the same generators.
    pub fn parse(
        generators: &[&str],
        text: &str,
        defs: &[(&str, &AbstractIntegralPoly)],
    ) -> Result<Self, PolyError> {
        let e = expr::parse(text)?;
        let ctx = PolyValue { defs, p: Self::zero(generators)? };
        for (_, d) in defs {
            ctx.p.check_same(d)?;
        }
        Ok(e.eval(&ctx)?.p)
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, PolyError> {
        self.generators
            .iter()
            .position(|g| g == name)
            .ok_or_else(|| PolyError::UnknownGenerator(name.to_string()))
    }

    pub fn coefficient(&self, exps: &[u32]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_default();
        *slot += &c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    fn check_same(&self, other: &Self) -> Result<(), PolyError> {
        if self.generators != other.generators {
            return Err(PolyError::GeneratorMismatch(self.generators.clone(), other.generators.clone()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&Rational::from_int(-1))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let mut out = self.empty_like();
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * r);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_same(other)?;
        let mut out = self.empty_like();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = self.constant_like(Rational::one());
        for _ in 0..k {
            acc = acc.mul(self).expect("same generators");
        }
        acc
    }

    /// Highest exponent of a generator (0 for the zero polynomial).
    pub fn degree_in(&self, name: &str) -> Result<u32, PolyError> {
        let i = self.index_of(name)?;
        Ok(self.terms.keys().map(|e| e[i]).max().unwrap_or(0))
    }

    /// Coefficient of `name^k`, as a polynomial over the same generators.
    pub fn coefficient_in(&self, name: &str, k: u32) -> Result<Self, PolyError> {
        let i = self.index_of(name)?;
        let mut out = self.empty_like();
        for (e, c) in &self.terms {
            if e[i] == k {
                let mut e = e.clone();
                e[i] = 0;
                out.add_term(e, c.clone());
            }
        }
        Ok(out)
    }

    /// `weights` is aligned with the generator list.
    pub fn weighted_degree(&self, weights: &[u32]) -> WeightedDegree {
        WeightedDegree::from_terms(self.terms.iter().map(|(e, c)| {
            let w = e.iter().zip(weights).map(|(a, b)| a * b).sum();
            (w, format!("{} {}", c, self.render_monomial(e)))
        }))
    }

    /// Re-expresses over another generator list by name; every generator
    /// that occurs must exist in the target.
    pub fn with_generators(&self, target: &[&str]) -> Result<Self, PolyError> {
        let mut out = Self::zero(target)?;
        let map: Vec<Option<usize>> =
            self.generators.iter().map(|g| target.iter().position(|t| t == g)).collect();
        for (e, c) in &self.terms {
            let mut ne = vec![0; target.len()];
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let j = map[i].ok_or_else(|| PolyError::UnknownGenerator(self.generators[i].clone()))?;
                ne[j] = k;
            }
            out.add_term(ne, c.clone());
        }
        Ok(out)
    }

    /// Substitutes generators by polynomials over `target`; generators absent
    /// from `images` are kept by name.
    pub fn substitute(&self, target: &[&str], images: &[(&str, Image)]) -> Result<Self, PolyError> {
        for (name, img) in images {
            self.index_of(name)?;
            let p = match img {
                Image::Poly(p) | Image::Square(p) => p,
            };
            if p.generators.iter().map(String::as_str).ne(target.iter().copied()) {
                return Err(PolyError::GeneratorMismatch(
                    p.generators.clone(),
                    target.iter().map(|s| s.to_string()).collect(),
                ));
            }
        }
        let mut out = Self::zero(target)?;
        for (e, c) in &self.terms {
            let mut term = out.constant_like(c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let name = &self.generators[i];
                let factor = match images.iter().find(|(n, _)| n == name) {
                    None => Self::generator(target, name)?.pow(k),
                    Some((_, Image::Poly(p))) => p.pow(k),
                    Some((_, Image::Square(p))) => {
                        if k % 2 == 1 {
                            return Err(PolyError::OddPower(name.clone()));
                        }
                        p.pow(k / 2)
                    }
                };
                term = term.mul(&factor)?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    fn render_monomial(&self, e: &[u32]) -> String {
        let parts: Vec<String> = e
            .iter()
            .zip(&self.generators)
            .filter(|(k, _)| **k > 0)
            .map(|(k, g)| if *k == 1 { g.clone() } else { format!("{g}^{k}") })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }

    /// Human-readable form, highest total degree first.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        let mut out = String::new();
        for (i, (e, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            let coeff = a.to_short_string();
            let mono = self.render_monomial(e);
            let body = match (a.is_one(), mono == "1") {
                (true, false) => mono,
                (_, true) => coeff,
                (false, false) => format!("{coeff} {mono}"),
            };
            match (i, neg) {
                (0, false) => out.push_str(&body),
                (0, true) => out.push_str(&format!("-{body}")),
                (_, false) => out.push_str(&format!(" + {body}")),
                (_, true) => out.push_str(&format!(" - {body}")),
            }
        }
        out
    }

    /// Canonical serialization: a header naming the generators, then one
    /// `num/den e1 e2 ...` line per term in ascending exponent order.
    pub fn to_canonical_text(&self) -> String {
        let mut s = format!("cmspec-poly v{POLY_FORMAT_VERSION}\ngenerators {}\n", self.generators.join(" "));
        for (e, c) in &self.terms {
            s.push_str(&c.to_string());
            for k in e {
                s.push_str(&format!(" {k}"));
            }
            s.push('\n');
        }
        s
    }

    pub fn parse_canonical_text(text: &str) -> Result<Self, PolyError> {
        let bad = |m: &str| PolyError::Parse(m.to_string());
        let mut lines = text.lines();
        if lines.next() != Some(&format!("cmspec-poly v{POLY_FORMAT_VERSION}")) {
            return Err(bad("missing or unsupported header"));
        }
        let gens: Vec<&str> = lines
            .next()
            .and_then(|l| l.strip_prefix("generators"))
            .ok_or_else(|| bad("missing generator line"))?
            .split_whitespace()
            .collect();
        let mut p = Self::zero(&gens)?;
        let mut last: Option<Vec<u32>> = None;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let mut it = line.split_whitespace();
            let c: Rational = it.next().unwrap_or("").parse().map_err(|_| bad(line))?;
            let e: Vec<u32> = it.map(|t| t.parse().map_err(|_| bad(line))).collect::<Result<_, _>>()?;
            if e.len() != gens.len() || c.is_zero() || last.as_ref().is_some_and(|l| *l >= e) {
                return Err(bad(line));
            }
            last = Some(e.clone());
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// Terms whose coefficients differ between `expected` and `derived`.
    pub fn term_diff(expected: &Self, derived: &Self) -> Result<Vec<TermDiff>, PolyError> {
        expected.check_same(derived)?;
        let mut keys: Vec<&Vec<u32>> = expected.terms.keys().chain(derived.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        Ok(keys
            .into_iter()
            .filter_map(|e| {
                let a = expected.coefficient(e);
                let b = derived.coefficient(e);
                (a != b).then(|| TermDiff {
                    monomial: expected.render_monomial(e),
                    expected: a.to_short_string(),
                    derived: b.to_short_string(),
                })
            })
            .collect())
    }
}

impl fmt::Display for AbstractIntegralPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for AbstractIntegralPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.generators.join(","), self.render())
    }
}

#[derive(Clone)]
struct PolyValue<'a> {
    defs: &'a [(&'a str, &'a AbstractIntegralPoly)],
    p: AbstractIntegralPoly,
}

impl<'a> PolyValue<'a> {
    fn with(&self, p: AbstractIntegralPoly) -> Self {
        PolyValue { defs: self.defs, p }
    }
}

impl<'a> ExprAlgebra for PolyValue<'a> {
    type Error = PolyError;

    fn from_rational(&self, r: &Rational) -> Self {
        self.with(self.p.constant_like(r.clone()))
    }

    fn var(&self, name: &str) -> Result<Self, PolyError> {
        if let Some((_, d)) = self.defs.iter().find(|(n, _)| *n == name) {
            return Ok(self.with((*d).clone()));
        }
        let gens: Vec<&str> = self.p.generators.iter().map(String::as_str).collect();
        Ok(self.with(AbstractIntegralPoly::generator(&gens, name)?))
    }

    /// There are no functions here, so `g2(...)` is a product.
    fn call(&self, name: &str, arg: &Expr) -> Result<Self, PolyError> {
        self.var(name)?.mul(&arg.eval(self)?)
    }

    fn add(&self, other: &Self) -> Result<Self, PolyError> {
        Ok(self.with(self.p.add(&other.p)?))
    }

    fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        Ok(self.with(self.p.sub(&other.p)?))
    }

    fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        Ok(self.with(self.p.mul(&other.p)?))
    }

    fn neg(&self) -> Self {
        self.with(self.p.neg())
    }

    fn scale(&self, r: &Rational) -> Self {
        self.with(self.p.scale(r))
    }
}
