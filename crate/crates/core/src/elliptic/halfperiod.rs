//! Evaluation at half-period points and reduction of the resulting
//! polynomials in the roots e1, e2, e3 of 4z³ − g2 z − g3.
//!
//! At a half period ℘′ vanishes and ℘ takes one of the values e_i. A
//! coefficient that is known to be constant can therefore be read off
//! exactly by substituting e_i and then eliminating the roots through
//! Vieta: σ1 = 0, σ2 = −g2/4, σ3 = g3/4.

use std::collections::BTreeMap;
use std::fmt;

use super::{canonicalize_argument, Argument, EllipticError, EllipticPoly};
use crate::grading::{WeightedDegree, WEIGHT_E, WEIGHT_G2, WEIGHT_G3};
use crate::scalars::{BigComplex, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HalfPeriod {
    E1,
    E2,
    E3,
}

impl HalfPeriod {
    fn index(self) -> usize {
        match self {
            HalfPeriod::E1 => 0,
            HalfPeriod::E2 => 1,
            HalfPeriod::E3 => 2,
        }
    }
}

/// Which root each argument takes at the chosen half-period point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfPeriodAssignment {
    map: BTreeMap<Argument, HalfPeriod>,
}

impl HalfPeriodAssignment {
    pub fn new(pairs: &[(&[i64], HalfPeriod)]) -> Result<Self, EllipticError> {
        let mut map = BTreeMap::new();
        for (raw, hp) in pairs {
            let (arg, _) = canonicalize_argument(raw)?;
            map.insert(arg, *hp);
        }
        Ok(HalfPeriodAssignment { map })
    }

    /// x1 − x2 = ω1, x2 − x3 = ω2, x1 − x3 = ω1 + ω2.
    pub fn a2() -> Self {
        Self::new(&[
            (&[1, -1, 0], HalfPeriod::E1),
            (&[0, 1, -1], HalfPeriod::E2),
            (&[1, 0, -1], HalfPeriod::E3),
        ])
        .expect("static arguments")
    }

    /// x = ω1, y = ω2; both x + y and x − y sit at the third half period.
    pub fn b2() -> Self {
        Self::new(&[
            (&[1, 0], HalfPeriod::E1),
            (&[0, 1], HalfPeriod::E2),
            (&[1, 1], HalfPeriod::E3),
            (&[1, -1], HalfPeriod::E3),
        ])
        .expect("static arguments")
    }

    pub fn get(&self, arg: &Argument) -> Option<HalfPeriod> {
        self.map.get(arg).copied()
    }
}

/// Exponent key (e1, e2, e3, g2, g3).
pub type EKey = [u16; 5];

/// Polynomial in e1, e2, e3, g2, g3 over the rationals.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct EPoly {
    terms: BTreeMap<EKey, Rational>,
}

impl EPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (EKey, Rational)>) -> Self {
        let mut out = EPoly::zero();
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    /// The single root e_{i+1}.
    pub fn e(i: usize) -> Self {
        let mut k = [0u16; 5];
        k[i] = 1;
        Self::from_terms([(k, Rational::one())])
    }

    pub fn g2() -> Self {
        Self::from_terms([([0, 0, 0, 1, 0], Rational::one())])
    }

    pub fn g3() -> Self {
        Self::from_terms([([0, 0, 0, 0, 1], Rational::one())])
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_terms([([0; 5], c)])
    }

    fn add_term(&mut self, k: EKey, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(k).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&EKey, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, -c);
        }
        out
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| (*k, c * r)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = EPoly::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut k = [0u16; 5];
                for i in 0..5 {
                    k[i] = ka[i] + kb[i];
                }
                out.add_term(k, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(Rational::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Relabels roots: e_i ↦ e_{perm[i]}.
    pub fn permute_roots(&self, perm: [usize; 3]) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| {
            let mut nk = *k;
            for i in 0..3 {
                nk[perm[i]] = k[i];
            }
            (nk, c.clone())
        }))
    }

    pub fn weighted_degree(&self) -> WeightedDegree {
        WeightedDegree::from_terms(self.terms.iter().map(|(k, c)| {
            let w = WEIGHT_E * (k[0] + k[1] + k[2]) as u32
                + WEIGHT_G2 * k[3] as u32
                + WEIGHT_G3 * k[4] as u32;
            (w, format!("{c} {}", render_key(k)))
        }))
    }

    /// Evaluates at numeric roots and invariants.
    pub fn eval(&self, roots: &[BigComplex; 3], g2: &BigComplex, g3: &BigComplex) -> BigComplex {
        let prec = g2.precision_bits();
        let mut acc = BigComplex::zero(prec);
        for (k, c) in &self.terms {
            let mut v = BigComplex::from_rational(c, prec);
            for i in 0..3 {
                if k[i] > 0 {
                    v = &v * &roots[i].powi(k[i] as u32);
                }
            }
            if k[3] > 0 {
                v = &v * &g2.powi(k[3] as u32);
            }
            if k[4] > 0 {
                v = &v * &g3.powi(k[4] as u32);
            }
            acc += &v;
        }
        acc
    }
}

fn render_key(k: &EKey) -> String {
    let names = ["e1", "e2", "e3", "g2", "g3"];
    let parts: Vec<String> = k
        .iter()
        .zip(names)
        .filter(|(e, _)| **e > 0)
        .map(|(e, n)| if *e == 1 { n.to_string() } else { format!("{n}^{e}") })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ")
    }
}

impl fmt::Display for EPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| format!("({c}) {}", render_key(k)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for EPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EPoly({self})")
    }
}

/// Polynomial in g2, g3 over the rationals; the value of a constant coefficient.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GPoly {
    terms: BTreeMap<(u16, u16), Rational>,
}

impl GPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_terms([((0, 0), c)])
    }

    pub fn monomial(g2: u16, g3: u16, c: Rational) -> Self {
        Self::from_terms([((g2, g3), c)])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u16, u16), Rational)>) -> Self {
        let mut out = GPoly::zero();
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    fn add_term(&mut self, k: (u16, u16), c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(k).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u16, u16), &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, g2: u16, g3: u16) -> Rational {
        self.terms.get(&(g2, g3)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, -c);
        }
        out
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| (*k, c * r)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = GPoly::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                out.add_term((ka.0 + kb.0, ka.1 + kb.1), ca * cb);
            }
        }
        out
    }

    pub fn eval(&self, g2: &Rational, g3: &Rational) -> Rational {
        self.terms
            .iter()
            .map(|(&(a, b), c)| c * &g2.pow(a as u32) * g3.pow(b as u32))
            .sum()
    }

    pub fn eval_complex(&self, g2: &BigComplex, g3: &BigComplex) -> BigComplex {
        let prec = g2.precision_bits();
        let mut acc = BigComplex::zero(prec);
        for (&(a, b), c) in &self.terms {
            let v = &(&BigComplex::from_rational(c, prec) * &g2.powi(a as u32)) * &g3.powi(b as u32);
            acc += &v;
        }
        acc
    }

    pub fn weight_of(key: (u16, u16)) -> u32 {
        WEIGHT_G2 * key.0 as u32 + WEIGHT_G3 * key.1 as u32
    }
}

impl fmt::Display for GPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(a, b), c) in &self.terms {
            let mut mono = Vec::new();
            if a > 0 {
                mono.push(if a == 1 { "g2".to_string() } else { format!("g2^{a}") });
            }
            if b > 0 {
                mono.push(if b == 1 { "g3".to_string() } else { format!("g3^{b}") });
            }
            let neg = c.is_negative();
            let mag = c.abs();
            let sign = match (first, neg) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            first = false;
            let coeff = if mag.is_integer() { mag.numerator().to_string() } else { mag.to_string() };
            if mono.is_empty() {
                write!(f, "{sign}{coeff}")?;
            } else if mag.is_one() {
                write!(f, "{sign}{}", mono.join(" "))?;
            } else {
                write!(f, "{sign}{coeff} {}", mono.join(" "))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for GPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GPoly({self})")
    }
}

/// Substitutes ℘(a) ↦ e_{hp(a)}, ℘′(a) ↦ 0.
pub fn specialize_half_periods(
    p: &EllipticPoly,
    hp: &HalfPeriodAssignment,
) -> Result<EPoly, EllipticError> {
    let mut out = EPoly::zero();
    for (m, c) in p.terms() {
        let mut key: EKey = [0, 0, 0, m.g2_exp(), m.g3_exp()];
        let mut vanishes = false;
        for f in m.factors() {
            let which = hp
                .get(&f.arg)
                .ok_or_else(|| EllipticError::UncoveredArgument(f.arg.to_string()))?;
            if f.pp > 0 {
                vanishes = true;
            }
            key[which.index()] += f.p;
        }
        if !vanishes {
            out.add_term(key, c.clone());
        }
    }
    Ok(out)
}

type P3 = BTreeMap<[u16; 3], Rational>;

fn p3_add_term(p: &mut P3, k: [u16; 3], c: Rational) {
    if c.is_zero() {
        return;
    }
    let slot = p.entry(k).or_insert_with(Rational::zero);
    *slot += c;
    if slot.is_zero() {
        p.remove(&k);
    }
}

fn p3_mul(a: &P3, b: &P3) -> P3 {
    let mut out = P3::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            p3_add_term(&mut out, [ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]], ca * cb);
        }
    }
    out
}

fn p3_one() -> P3 {
    let mut p = P3::new();
    p.insert([0, 0, 0], Rational::one());
    p
}

fn p3_pow(a: &P3, k: u32, cache: &mut BTreeMap<(u8, u32), P3>, tag: u8) -> P3 {
    if let Some(v) = cache.get(&(tag, k)) {
        return v.clone();
    }
    let v = if k == 0 { p3_one() } else { p3_mul(&p3_pow(a, k - 1, cache, tag), a) };
    cache.insert((tag, k), v.clone());
    v
}

fn sigma(i: usize) -> P3 {
    let mut p = P3::new();
    match i {
        1 => {
            p.insert([1, 0, 0], Rational::one());
            p.insert([0, 1, 0], Rational::one());
            p.insert([0, 0, 1], Rational::one());
        }
        2 => {
            p.insert([1, 1, 0], Rational::one());
            p.insert([1, 0, 1], Rational::one());
            p.insert([0, 1, 1], Rational::one());
        }
        _ => {
            p.insert([1, 1, 1], Rational::one());
        }
    }
    p
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];

/// Restriction to the plane e3 = −e1 − e2, as a polynomial in (e1, e2).
fn restrict_to_plane(p: &P3) -> P3 {
    let mut out = P3::new();
    // (−e1 − e2)^k = (−1)^k Σ C(k, j) e1^j e2^(k−j)
    for (k, c) in p {
        let n = k[2] as u32;
        let sign = if n % 2 == 0 { Rational::one() } else { -Rational::one() };
        let mut binom = Rational::one();
        for j in 0..=n {
            let coeff = c * &sign * &binom;
            p3_add_term(&mut out, [k[0] + j as u16, k[1] + (n - j) as u16, 0], coeff);
            binom = &binom * &Rational::new((n - j) as i64, (j + 1) as i64);
        }
    }
    out
}

fn permute_p3(p: &P3, perm: [usize; 3]) -> P3 {
    let mut out = P3::new();
    for (k, c) in p {
        let mut nk = [0u16; 3];
        for i in 0..3 {
            nk[perm[i]] = k[i];
        }
        p3_add_term(&mut out, nk, c.clone());
    }
    out
}

fn p3_sub(a: &P3, b: &P3) -> P3 {
    let mut out = a.clone();
    for (k, c) in b {
        p3_add_term(&mut out, *k, -c);
    }
    out
}

/// Rewrites a polynomial in the roots through g2, g3.
///
/// The input only has to be symmetric *on the root variety*, i.e. modulo
/// e1 + e2 + e3 = 0 once g2, g3 are themselves expressed through the roots;
/// anything else is rejected with the asymmetric part.
pub fn reduce_symmetric(p: &EPoly) -> Result<GPoly, EllipticError> {
    // g2 = −4σ2, g3 = 4σ3: move everything into the roots.
    let mut g2_root = sigma(2);
    for c in g2_root.values_mut() {
        *c = c.clone() * Rational::from_int(-4);
    }
    let mut g3_root = sigma(3);
    for c in g3_root.values_mut() {
        *c = c.clone() * Rational::from_int(4);
    }
    let mut cache = BTreeMap::new();
    let mut in_roots = P3::new();
    for (k, c) in p.terms() {
        let mut mono = P3::new();
        mono.insert([k[0], k[1], k[2]], c.clone());
        let t = p3_mul(
            &p3_mul(&mono, &p3_pow(&g2_root, k[3] as u32, &mut cache, 2)),
            &p3_pow(&g3_root, k[4] as u32, &mut cache, 3),
        );
        for (kk, cc) in t {
            p3_add_term(&mut in_roots, kk, cc);
        }
    }

    let plane = restrict_to_plane(&in_roots);
    let mut sym = P3::new();
    for perm in PERMS {
        for (k, c) in permute_p3(&plane, perm) {
            p3_add_term(&mut sym, k, c * Rational::new(1, 6));
        }
    }
    let asym = restrict_to_plane(&p3_sub(&plane, &restrict_to_plane(&sym)));
    if !asym.is_empty() {
        let rendered = EPoly::from_terms(asym.iter().map(|(k, c)| ([k[0], k[1], k[2], 0, 0], c.clone())));
        return Err(EllipticError::NotSymmetric(rendered.to_string()));
    }

    // Leading-term reduction in lex order; σ1 terms vanish on the variety.
    let (s1, s2, s3) = (sigma(1), sigma(2), sigma(3));
    let mut cache = BTreeMap::new();
    let mut out = GPoly::zero();
    let minus_quarter_g2 = Rational::new(-1, 4);
    let quarter_g3 = Rational::new(1, 4);
    while let Some((lead, c)) = sym.iter().next_back().map(|(k, c)| (*k, c.clone())) {
        let (a, b, cc) = (lead[0], lead[1], lead[2]);
        debug_assert!(a >= b && b >= cc, "symmetric leading term");
        let basis = p3_mul(
            &p3_mul(
                &p3_pow(&s1, (a - b) as u32, &mut cache, 1),
                &p3_pow(&s2, (b - cc) as u32, &mut cache, 2),
            ),
            &p3_pow(&s3, cc as u32, &mut cache, 3),
        );
        for (k, v) in basis {
            p3_add_term(&mut sym, k, -(&c * &v));
        }
        if a == b {
            let j = (b - cc) as u32;
            let l = cc as u32;
            let value = &c * &minus_quarter_g2.pow(j) * quarter_g3.pow(l);
            out.add_term((j as u16, l as u16), value);
        }
    }
    Ok(out)
}
