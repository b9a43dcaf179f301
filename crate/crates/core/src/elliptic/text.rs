//! Canonical text form of elliptic monomials and polynomials.
//!
//! One term per line: `g2^a g3^b P[1,-1,0]^c Pp[1,-1,0]^d : num/den`, absent
//! factors omitted, the empty monomial written as `1`.

use super::{canonicalize_argument, EllipticError, EllipticMonomial, EllipticPoly, Factor};
use crate::scalars::Rational;

pub fn write_monomial(m: &EllipticMonomial) -> String {
    let mut parts = Vec::new();
    if m.g2_exp() > 0 {
        parts.push(format!("g2^{}", m.g2_exp()));
    }
    if m.g3_exp() > 0 {
        parts.push(format!("g3^{}", m.g3_exp()));
    }
    for f in m.factors() {
        if f.p > 0 {
            parts.push(format!("P{}^{}", f.arg, f.p));
        }
        if f.pp > 0 {
            parts.push(format!("Pp{}^{}", f.arg, f.pp));
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join(" ")
    }
}

fn parse_exp(s: &str) -> Result<u16, EllipticError> {
    s.parse::<u16>()
        .map_err(|_| EllipticError::Parse(format!("bad exponent {s:?}")))
}

pub fn parse_monomial(s: &str) -> Result<EllipticMonomial, EllipticError> {
    let s = s.trim();
    if s == "1" {
        return Ok(EllipticMonomial::one());
    }
    let mut g2 = 0;
    let mut g3 = 0;
    let mut factors = Vec::new();
    for tok in s.split_whitespace() {
        let (base, exp) = tok
            .rsplit_once('^')
            .ok_or_else(|| EllipticError::Parse(format!("missing exponent in {tok:?}")))?;
        let exp = parse_exp(exp)?;
        match base {
            "g2" => g2 += exp,
            "g3" => g3 += exp,
            _ => {
                let (is_prime, rest) = if let Some(r) = base.strip_prefix("Pp") {
                    (true, r)
                } else if let Some(r) = base.strip_prefix('P') {
                    (false, r)
                } else {
                    return Err(EllipticError::Parse(format!("unknown factor {tok:?}")));
                };
                let inner = rest
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(|| EllipticError::Parse(format!("bad argument in {tok:?}")))?;
                let raw: Vec<i64> = inner
                    .split(',')
                    .map(|c| c.trim().parse::<i64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| EllipticError::Parse(format!("bad argument in {tok:?}")))?;
                let (arg, parity) = canonicalize_argument(&raw)?;
                if parity < 0 {
                    return Err(EllipticError::Parse(format!(
                        "argument {inner} is not in canonical sign"
                    )));
                }
                if is_prime {
                    let pp = u8::try_from(exp)
                        .map_err(|_| EllipticError::Parse(format!("exponent too large in {tok:?}")))?;
                    factors.push(Factor { arg, p: 0, pp });
                } else {
                    factors.push(Factor { arg, p: exp, pp: 0 });
                }
            }
        }
    }
    Ok(EllipticMonomial::raw(factors, g2, g3))
}

impl EllipticPoly {
    /// Canonical text, one `monomial : num/den` line per term in monomial order.
    pub fn to_canonical_text(&self) -> String {
        let mut out = String::new();
        for (m, c) in self.terms() {
            out.push_str(&write_monomial(m));
            out.push_str(" : ");
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse_canonical_text(text: &str) -> Result<Self, EllipticError> {
        let mut terms = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (mono, coeff) = line
                .rsplit_once(" : ")
                .ok_or_else(|| EllipticError::Parse(format!("missing ' : ' in {line:?}")))?;
            let c: Rational = coeff
                .parse()
                .map_err(|_| EllipticError::Parse(format!("bad coefficient {coeff:?}")))?;
            terms.push((parse_monomial(mono)?, c));
        }
        Ok(EllipticPoly::from_terms(terms))
    }
}
