//! The coefficient ring of all operators: polynomials in ℘(a) and ℘′(a) over
//! integer linear arguments `a`, with the curve invariants g2 and g3.
//!
//! Every value is kept in normal form: ℘′(a) appears with exponent at most
//! one, any ℘′(a)² being rewritten as 4℘(a)³ − g2℘(a) − g3. Derivatives of ℘
//! beyond the first never appear; ℘″(a) is stored as 6℘(a)² − g2/2.
//! Addition-theorem identities between different arguments are *not*
//! applied, so two polynomials that agree as functions may still differ
//! structurally; those cases are settled numerically by [`crate::numeric`].

mod halfperiod;
mod text;

pub use halfperiod::{reduce_symmetric, specialize_half_periods, EPoly, GPoly, HalfPeriod, HalfPeriodAssignment};

use std::collections::BTreeSet;
use std::fmt;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use thiserror::Error;

use crate::grading::{WeightedDegree, WEIGHT_G2, WEIGHT_G3, WEIGHT_WP, WEIGHT_WP_PRIME};
use crate::scalars::Rational;

/// Largest number of configuration variables an [`Argument`] can carry.
pub const MAX_VARS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EllipticError {
    #[error("zero argument: ℘ has a pole at the lattice origin")]
    ZeroArgument,
    #[error("argument has {0} entries, at most {MAX_VARS} are supported")]
    TooManyVariables(usize),
    #[error("argument coefficient {0} out of range")]
    CoefficientOutOfRange(i64),
    #[error("argument {0} is not covered by the half-period assignment")]
    UncoveredArgument(String),
    #[error("polynomial is not symmetric in e1, e2, e3; asymmetric remainder: {0}")]
    NotSymmetric(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Integer linear form in the configuration variables, in canonical sign:
/// the first nonzero entry is positive.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Argument {
    coeffs: [i8; MAX_VARS],
    len: u8,
}

/// Canonicalizes a raw linear form. The returned parity is −1 when the form
/// had to be negated; ℘′ coefficients must be multiplied by it.
pub fn canonicalize_argument(raw: &[i64]) -> Result<(Argument, i8), EllipticError> {
    if raw.len() > MAX_VARS {
        return Err(EllipticError::TooManyVariables(raw.len()));
    }
    let first = raw.iter().copied().find(|&c| c != 0).ok_or(EllipticError::ZeroArgument)?;
    let parity: i8 = if first < 0 { -1 } else { 1 };
    let mut coeffs = [0i8; MAX_VARS];
    for (slot, &c) in coeffs.iter_mut().zip(raw) {
        let v = c * parity as i64;
        *slot = i8::try_from(v).map_err(|_| EllipticError::CoefficientOutOfRange(c))?;
    }
    Ok((Argument { coeffs, len: raw.len() as u8 }, parity))
}

impl Argument {
    pub fn n_vars(&self) -> usize {
        self.len as usize
    }

    pub fn coeffs(&self) -> &[i8] {
        &self.coeffs[..self.len as usize]
    }

    pub fn coeff(&self, var: usize) -> i64 {
        self.coeffs[var] as i64
    }

    pub fn to_vec(&self) -> Vec<i64> {
        self.coeffs().iter().map(|&c| c as i64).collect()
    }

    /// Renders the form with the given variable names, e.g. `x1-x2`.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (i, &c) in self.coeffs().iter().enumerate() {
            if c == 0 {
                continue;
            }
            let name = names.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1));
            let sign = if c < 0 { "-" } else if out.is_empty() { "" } else { "+" };
            let mag = c.unsigned_abs();
            if mag == 1 {
                out.push_str(&format!("{sign}{name}"));
            } else {
                out.push_str(&format!("{sign}{mag}{name}"));
            }
        }
        out
    }
}

impl fmt::Debug for Argument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs())
    }
}

impl fmt::Display for Argument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs().iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Powers of ℘(arg) and ℘′(arg) inside one monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factor {
    pub arg: Argument,
    pub p: u16,
    pub pp: u8,
}

impl Factor {
    fn weight(&self) -> u32 {
        WEIGHT_WP * self.p as u32 + WEIGHT_WP_PRIME * self.pp as u32
    }
}

/// Product of factors sorted by argument, times g2^a g3^b.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct EllipticMonomial {
    factors: SmallVec<[Factor; 4]>,
    g2: u16,
    g3: u16,
}

impl EllipticMonomial {
    pub fn one() -> Self {
        Self::default()
    }

    /// Builds a monomial from arbitrary factors; repeated arguments are merged.
    /// The result may be outside normal form when ℘′ exponents exceed one.
    pub fn raw(factors: impl IntoIterator<Item = Factor>, g2: u16, g3: u16) -> Self {
        let mut fs: SmallVec<[Factor; 4]> = SmallVec::new();
        for f in factors {
            if f.p == 0 && f.pp == 0 {
                continue;
            }
            match fs.binary_search_by(|x| x.arg.cmp(&f.arg)) {
                Ok(i) => {
                    fs[i].p += f.p;
                    fs[i].pp += f.pp;
                }
                Err(i) => fs.insert(i, f),
            }
        }
        EllipticMonomial { factors: fs, g2, g3 }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn g2_exp(&self) -> u16 {
        self.g2
    }

    pub fn g3_exp(&self) -> u16 {
        self.g3
    }

    /// True when no ℘ or ℘′ factor is present.
    pub fn is_free_of_wp(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn has_wp_prime(&self) -> bool {
        self.factors.iter().any(|f| f.pp > 0)
    }

    pub fn is_normal(&self) -> bool {
        self.factors.iter().all(|f| f.pp <= 1 && (f.p > 0 || f.pp > 0))
    }

    pub fn weight(&self) -> u32 {
        self.factors.iter().map(Factor::weight).sum::<u32>()
            + WEIGHT_G2 * self.g2 as u32
            + WEIGHT_G3 * self.g3 as u32
    }

    pub fn degree_in(&self, arg: &Argument) -> (u16, u8) {
        self.factors
            .iter()
            .find(|f| &f.arg == arg)
            .map(|f| (f.p, f.pp))
            .unwrap_or((0, 0))
    }

    fn remove_empty(&mut self) {
        self.factors.retain(|f| f.p > 0 || f.pp > 0);
    }

    /// Human-readable rendering, e.g. `g2 p(x1-x2)^2 p'(x1-x3)`.
    pub fn render(&self, names: &[String]) -> String {
        let mut parts = Vec::new();
        match self.g2 {
            0 => {}
            1 => parts.push("g2".to_string()),
            e => parts.push(format!("g2^{e}")),
        }
        match self.g3 {
            0 => {}
            1 => parts.push("g3".to_string()),
            e => parts.push(format!("g3^{e}")),
        }
        for f in &self.factors {
            let a = f.arg.render(names);
            match f.p {
                0 => {}
                1 => parts.push(format!("p({a})")),
                e => parts.push(format!("p({a})^{e}")),
            }
            match f.pp {
                0 => {}
                1 => parts.push(format!("p'({a})")),
                e => parts.push(format!("p'({a})^{e}")),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" ")
        }
    }
}

/// Product of two normal-form monomials, itself expanded into normal form.
/// Each entry is a monomial with an integer multiplier.
fn mul_monomials(a: &EllipticMonomial, b: &EllipticMonomial) -> SmallVec<[(EllipticMonomial, i64); 1]> {
    let mut factors: SmallVec<[Factor; 4]> = SmallVec::with_capacity(a.factors.len() + b.factors.len());
    let mut collisions: SmallVec<[usize; 2]> = SmallVec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.factors.len() || j < b.factors.len() {
        let next = match (a.factors.get(i), b.factors.get(j)) {
            (Some(x), Some(y)) if x.arg == y.arg => {
                i += 1;
                j += 1;
                let pp = x.pp + y.pp;
                if pp >= 2 {
                    collisions.push(factors.len());
                }
                Factor { arg: x.arg, p: x.p + y.p, pp: pp % 2 }
            }
            (Some(x), Some(y)) if x.arg < y.arg => {
                i += 1;
                *x
            }
            (Some(x), None) => {
                i += 1;
                *x
            }
            (_, Some(y)) => {
                j += 1;
                *y
            }
            (None, None) => unreachable!(),
        };
        factors.push(next);
    }
    let base = EllipticMonomial { factors, g2: a.g2 + b.g2, g3: a.g3 + b.g3 };
    let mut out: SmallVec<[(EllipticMonomial, i64); 1]> = SmallVec::new();
    out.push((base, 1));
    // ℘′² = 4℘³ − g2℘ − g3, once per colliding argument.
    for &idx in &collisions {
        let mut next = SmallVec::new();
        for (m, k) in out {
            let mut t1 = m.clone();
            t1.factors[idx].p += 3;
            next.push((t1, 4 * k));
            let mut t2 = m.clone();
            t2.factors[idx].p += 1;
            t2.g2 += 1;
            next.push((t2, -k));
            let mut t3 = m;
            t3.g3 += 1;
            next.push((t3, -k));
        }
        out = next;
    }
    if !collisions.is_empty() {
        for (m, _) in out.iter_mut() {
            m.remove_empty();
        }
    }
    out
}

/// Accumulator keyed by monomial; converted to a sorted [`EllipticPoly`].
pub(crate) type TermMap = FxHashMap<EllipticMonomial, Rational>;

pub(crate) fn accumulate(map: &mut TermMap, m: EllipticMonomial, c: Rational) {
    if c.is_zero() {
        return;
    }
    match map.get_mut(&m) {
        Some(slot) => *slot += c,
        None => {
            map.insert(m, c);
        }
    }
}

/// Normal-form polynomial over the rationals in ℘, ℘′, g2, g3.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct EllipticPoly {
    terms: Vec<(EllipticMonomial, Rational)>,
}

impl EllipticPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(EllipticMonomial::one(), c)
    }

    pub fn monomial(m: EllipticMonomial, c: Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        if m.is_normal() {
            EllipticPoly { terms: vec![(m, c)] }
        } else {
            Self::normalize_raw(vec![(m, c)])
        }
    }

    pub fn g2() -> Self {
        Self::monomial(EllipticMonomial::raw([], 1, 0), Rational::one())
    }

    pub fn g3() -> Self {
        Self::monomial(EllipticMonomial::raw([], 0, 1), Rational::one())
    }

    /// ℘ of a raw linear form; evenness makes the sign irrelevant.
    pub fn wp(raw: &[i64]) -> Result<Self, EllipticError> {
        let (arg, _) = canonicalize_argument(raw)?;
        Ok(Self::wp_arg(arg))
    }

    /// ℘′ of a raw linear form, sign-adjusted by oddness.
    pub fn wp_prime(raw: &[i64]) -> Result<Self, EllipticError> {
        let (arg, parity) = canonicalize_argument(raw)?;
        Ok(Self::wp_prime_arg(arg).scale(&Rational::from_int(parity as i64)))
    }

    /// ℘″ of a raw linear form, stored as 6℘² − g2/2.
    pub fn wp_second(raw: &[i64]) -> Result<Self, EllipticError> {
        let (arg, _) = canonicalize_argument(raw)?;
        Ok(Self::wp_second_arg(arg))
    }

    pub fn wp_arg(arg: Argument) -> Self {
        Self::monomial(EllipticMonomial::raw([Factor { arg, p: 1, pp: 0 }], 0, 0), Rational::one())
    }

    pub fn wp_prime_arg(arg: Argument) -> Self {
        Self::monomial(EllipticMonomial::raw([Factor { arg, p: 0, pp: 1 }], 0, 0), Rational::one())
    }

    pub fn wp_second_arg(arg: Argument) -> Self {
        let sq = EllipticMonomial::raw([Factor { arg, p: 2, pp: 0 }], 0, 0);
        let g2 = EllipticMonomial::raw([], 1, 0);
        Self::from_map(
            [(sq, Rational::from_int(6)), (g2, Rational::new(-1, 2))]
                .into_iter()
                .collect(),
        )
    }

    /// The ℘′² replacement 4℘³ − g2℘ − g3.
    pub fn weierstrass_cubic(arg: Argument) -> Self {
        let m = |p: u16, g2: u16, g3: u16| {
            EllipticMonomial::raw([Factor { arg, p, pp: 0 }], g2, g3)
        };
        Self::from_map(
            [
                (m(3, 0, 0), Rational::from_int(4)),
                (m(1, 1, 0), Rational::from_int(-1)),
                (m(0, 0, 1), Rational::from_int(-1)),
            ]
            .into_iter()
            .collect(),
        )
    }

    /// Brings arbitrary (possibly non-normal) terms into normal form.
    pub fn normalize_raw(terms: Vec<(EllipticMonomial, Rational)>) -> Self {
        let mut acc = EllipticPoly::zero();
        for (m, c) in terms {
            if c.is_zero() {
                continue;
            }
            let mut reduced = EllipticMonomial { factors: SmallVec::new(), g2: m.g2, g3: m.g3 };
            let mut pending: Vec<(Argument, u8)> = Vec::new();
            for f in &m.factors {
                let keep = f.pp % 2;
                if f.p > 0 || keep > 0 {
                    reduced.factors.push(Factor { arg: f.arg, p: f.p, pp: keep });
                }
                if f.pp >= 2 {
                    pending.push((f.arg, f.pp / 2));
                }
            }
            let mut term = EllipticPoly { terms: vec![(reduced, c)] };
            for (arg, q) in pending {
                term = term.mul(&Self::weierstrass_cubic(arg).pow(q as u32));
            }
            acc = acc.add(&term);
        }
        acc
    }

    pub(crate) fn from_map(map: TermMap) -> Self {
        let mut terms: Vec<(EllipticMonomial, Rational)> =
            map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        EllipticPoly { terms }
    }

    /// Builds from normal-form terms given in any order; duplicates are summed.
    pub fn from_terms(terms: impl IntoIterator<Item = (EllipticMonomial, Rational)>) -> Self {
        let mut map = TermMap::default();
        let mut raw = Vec::new();
        for (m, c) in terms {
            if m.is_normal() {
                accumulate(&mut map, m, c);
            } else {
                raw.push((m, c));
            }
        }
        Self::from_map(map).add(&Self::normalize_raw(raw))
    }

    pub fn terms(&self) -> &[(EllipticMonomial, Rational)] {
        &self.terms
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

    /// True when no ℘ or ℘′ factor survives (only rationals, g2, g3).
    pub fn is_free_of_wp(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_free_of_wp())
    }

    /// The value as a polynomial in g2, g3 when free of ℘ generators.
    pub fn as_gpoly(&self) -> Option<GPoly> {
        if !self.is_free_of_wp() {
            return None;
        }
        Some(GPoly::from_terms(
            self.terms.iter().map(|(m, c)| ((m.g2, m.g3), c.clone())),
        ))
    }

    pub fn from_gpoly(g: &GPoly) -> Self {
        Self::from_terms(
            g.terms()
                .map(|(&(a, b), c)| (EllipticMonomial::raw([], a, b), c.clone())),
        )
    }

    pub fn arguments(&self) -> BTreeSet<Argument> {
        self.terms
            .iter()
            .flat_map(|(m, _)| m.factors.iter().map(|f| f.arg))
            .collect()
    }

    pub fn max_wp_degree(&self, arg: &Argument) -> u16 {
        self.terms.iter().map(|(m, _)| m.degree_in(arg).0).max().unwrap_or(0)
    }

    pub fn neg(&self) -> Self {
        EllipticPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        EllipticPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.merge(other, true)
    }

    fn merge(&self, other: &Self, negate: bool) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.terms;
        let b = &other.terms;
        let sign = |c: &Rational| if negate { -c } else { c.clone() };
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    terms.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    terms.push((b[j].0.clone(), sign(&b[j].1)));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        terms.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        terms.extend(a[i..].iter().cloned());
        terms.extend(b[j..].iter().map(|(m, c)| (m.clone(), sign(c))));
        EllipticPoly { terms }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut map = TermMap::default();
        self.mul_into(other, &Rational::one(), &mut map);
        Self::from_map(map)
    }

    /// Adds `scale · self · other` into an accumulator.
    pub(crate) fn mul_into(&self, other: &Self, scale: &Rational, map: &mut TermMap) {
        map.reserve(self.terms.len().saturating_mul(other.terms.len()).min(1 << 16));
        for (ma, ca) in &self.terms {
            let cs = ca * scale;
            for (mb, cb) in &other.terms {
                let c = &cs * cb;
                for (m, k) in mul_monomials(ma, mb) {
                    if k == 1 {
                        accumulate(map, m, c.clone());
                    } else {
                        accumulate(map, m, &c * &Rational::from_int(k));
                    }
                }
            }
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// ∂/∂x_var by the chain rule: ℘(a)′ = a_var ℘′(a), ℘′(a)′ = a_var (6℘(a)² − g2/2).
    pub fn differentiate(&self, var: usize) -> Self {
        let mut map = TermMap::default();
        for (m, c) in &self.terms {
            for (idx, f) in m.factors.iter().enumerate() {
                if var >= f.arg.n_vars() {
                    continue;
                }
                let a = f.arg.coeff(var);
                if a == 0 {
                    continue;
                }
                if f.p > 0 {
                    let coeff = c * &Rational::from_int(a * f.p as i64);
                    let mut base = m.clone();
                    base.factors[idx].p -= 1;
                    if f.pp == 0 {
                        base.factors[idx].pp = 1;
                        accumulate(&mut map, base, coeff);
                    } else {
                        // ℘^(p−1) ℘′² → ℘^(p−1) (4℘³ − g2℘ − g3)
                        base.factors[idx].pp = 0;
                        let p = base.factors[idx].p;
                        let mut t1 = base.clone();
                        t1.factors[idx].p = p + 3;
                        accumulate(&mut map, t1, &coeff * &Rational::from_int(4));
                        let mut t2 = base.clone();
                        t2.factors[idx].p = p + 1;
                        t2.g2 += 1;
                        accumulate(&mut map, t2, -&coeff);
                        let mut t3 = base;
                        t3.g3 += 1;
                        t3.remove_empty();
                        accumulate(&mut map, t3, -coeff);
                    }
                }
                if f.pp == 1 {
                    let coeff = c * &Rational::from_int(a);
                    let mut base = m.clone();
                    base.factors[idx].pp = 0;
                    let mut t1 = base.clone();
                    t1.factors[idx].p += 2;
                    accumulate(&mut map, t1, &coeff * &Rational::from_int(6));
                    let mut t2 = base;
                    t2.g2 += 1;
                    t2.remove_empty();
                    accumulate(&mut map, t2, &coeff * &Rational::new(-1, 2));
                }
            }
        }
        Self::from_map(map)
    }

    pub fn weighted_degree(&self) -> WeightedDegree {
        WeightedDegree::from_terms(
            self.terms
                .iter()
                .map(|(m, c)| (m.weight(), format!("{c} {}", m.render(&[])))),
        )
    }

    /// Re-expresses every argument through `f` (e.g. a variable permutation),
    /// re-canonicalizing signs. The result may merge arguments.
    pub fn map_arguments<F>(&self, f: F) -> Result<Self, EllipticError>
    where
        F: Fn(&Argument) -> Vec<i64>,
    {
        let mut acc = EllipticPoly::zero();
        for (m, c) in &self.terms {
            let mut term = EllipticPoly::monomial(EllipticMonomial::raw([], m.g2, m.g3), c.clone());
            for fac in &m.factors {
                let raw = f(&fac.arg);
                if fac.p > 0 {
                    term = term.mul(&Self::wp(&raw)?.pow(fac.p as u32));
                }
                if fac.pp > 0 {
                    term = term.mul(&Self::wp_prime(&raw)?.pow(fac.pp as u32));
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Applies `x_i ↦ x_{perm[i]}` to every argument.
    pub fn permute_vars(&self, perm: &[usize]) -> Result<Self, EllipticError> {
        self.map_arguments(|a| {
            let mut v = vec![0i64; a.n_vars()];
            for (i, &c) in a.coeffs().iter().enumerate() {
                v[perm[i]] = c as i64;
            }
            v
        })
    }

    /// Human-readable rendering with named variables.
    pub fn render(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            let sign = match (k, neg) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            out.push_str(sign);
            let body = m.render(names);
            let coeff = if mag.is_integer() {
                mag.numerator().to_string()
            } else {
                mag.to_string()
            };
            if body == "1" {
                out.push_str(&coeff);
            } else if mag.is_one() {
                out.push_str(&body);
            } else {
                out.push_str(&format!("{coeff} {body}"));
            }
        }
        out
    }
}

impl fmt::Debug for EllipticPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EllipticPoly({})", self.render(&[]))
    }
}

pub use text::{parse_monomial, write_monomial};

#[cfg(test)]
mod tests;
