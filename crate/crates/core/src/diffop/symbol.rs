//! Principal symbols: ∂_j replaced by the formal covariable ξ_j (no factor i).

use std::collections::BTreeMap;
use std::fmt;

use super::MultiIndex;
use crate::elliptic::{EllipticPoly, GPoly};
use crate::scalars::Rational;

/// Homogeneous polynomial in ξ with elliptic coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct SymbolPoly {
    n: usize,
    terms: Vec<(MultiIndex, EllipticPoly)>,
}

impl SymbolPoly {
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, EllipticPoly)>) -> Self {
        let mut map: BTreeMap<MultiIndex, EllipticPoly> = BTreeMap::new();
        for (a, f) in terms {
            let slot = map.entry(a).or_default();
            *slot = slot.add(&f);
        }
        let terms: Vec<_> = map.into_iter().filter(|(_, f)| !f.is_zero()).collect();
        debug_assert!(
            terms.windows(2).all(|w| w[0].0.total() == w[1].0.total()),
            "symbol terms share one degree"
        );
        SymbolPoly { n, terms }
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(MultiIndex, EllipticPoly)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.first().map(|(a, _)| a.total())
    }

    /// Constant symbol when every coefficient is free of ℘ and ℘′.
    pub fn structural_constant(&self) -> Option<ConstSymbol> {
        let mut out = ConstSymbol::zero(self.n);
        for (a, f) in &self.terms {
            out.terms.insert(*a, f.as_gpoly()?);
        }
        Some(out)
    }

    /// First coefficient that still depends on x, if any.
    pub fn first_nonconstant(&self) -> Option<(MultiIndex, EllipticPoly)> {
        self.terms.iter().find(|(_, f)| !f.is_free_of_wp()).cloned()
    }

    pub fn mul(&self, other: &SymbolPoly) -> SymbolPoly {
        let mut terms = Vec::new();
        for (a, f) in &self.terms {
            for (b, g) in &other.terms {
                terms.push((a.plus(b), f.mul(g)));
            }
        }
        SymbolPoly::from_terms(self.n, terms)
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .rev()
            .map(|(a, f)| format!("({}) {}", f.render(names), render_xi(a, names)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for SymbolPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymbolPoly({})", self.render(&[]))
    }
}

pub(crate) fn render_xi(a: &MultiIndex, names: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &o) in a.orders().iter().enumerate() {
        if o == 0 {
            continue;
        }
        let name = names
            .get(i)
            .map(|n| format!("ξ{n}"))
            .unwrap_or_else(|| format!("ξ{}", i + 1));
        parts.push(if o == 1 { name } else { format!("{name}^{o}") });
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ")
    }
}

/// Polynomial in ξ whose coefficients are polynomials in g2, g3.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstSymbol {
    n: usize,
    terms: BTreeMap<MultiIndex, GPoly>,
}

impl ConstSymbol {
    pub fn zero(n: usize) -> Self {
        ConstSymbol { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        Self::monomial(MultiIndex::zero(n), GPoly::constant(Rational::one()))
    }

    pub fn monomial(a: MultiIndex, c: GPoly) -> Self {
        let mut s = Self::zero(a.n_vars());
        if !c.is_zero() {
            s.terms.insert(a, c);
        }
        s
    }

    /// ξ_var.
    pub fn xi(n: usize, var: usize) -> Self {
        Self::monomial(MultiIndex::unit(n, var), GPoly::constant(Rational::one()))
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, GPoly)>) -> Self {
        let mut s = Self::zero(n);
        for (a, c) in terms {
            s.add_term(a, c);
        }
        s
    }

    fn add_term(&mut self, a: MultiIndex, c: GPoly) {
        let slot = self.terms.entry(a).or_default();
        *slot = slot.add(&c);
        if slot.is_zero() {
            self.terms.remove(&a);
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &GPoly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, a: &MultiIndex) -> GPoly {
        self.terms.get(a).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|a| a.total()).max()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut s = self.clone();
        for (a, c) in &other.terms {
            s.add_term(*a, c.clone());
        }
        s
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut s = self.clone();
        for (a, c) in &other.terms {
            s.add_term(*a, c.scale(&-Rational::one()));
        }
        s
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|(a, c)| (*a, c.scale(r))))
    }

    pub fn scale_g(&self, g: &GPoly) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|(a, c)| (*a, c.mul(g))))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut s = Self::zero(self.n);
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                s.add_term(a.plus(b), c.mul(d));
            }
        }
        s
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.n);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// ∂/∂ξ_var.
    pub fn partial(&self, var: usize) -> Self {
        Self::from_terms(
            self.n,
            self.terms.iter().filter(|(a, _)| a.get(var) > 0).map(|(a, c)| {
                let k = a.get(var) as i64;
                let lowered = a.minus(&MultiIndex::unit(self.n, var)).expect("positive order");
                (lowered, c.scale(&Rational::from_int(k)))
            }),
        )
    }

    /// Value at a rational covector for given rational invariants.
    pub fn eval(&self, xi: &[Rational], g2: &Rational, g3: &Rational) -> Rational {
        self.terms
            .iter()
            .map(|(a, c)| {
                let mono: Rational = a
                    .orders()
                    .iter()
                    .zip(xi)
                    .map(|(&o, x)| x.pow(o as u32))
                    .product();
                c.eval(g2, g3) * mono
            })
            .sum()
    }

    /// Applies a signed permutation ξ_i ↦ sign_i ξ_{perm[i]}.
    pub fn signed_permute(&self, perm: &[usize], signs: &[i64]) -> Self {
        Self::from_terms(
            self.n,
            self.terms.iter().map(|(a, c)| {
                let sign: i64 = a
                    .orders()
                    .iter()
                    .zip(signs)
                    .map(|(&o, &s)| if o % 2 == 1 { s } else { 1 })
                    .product();
                (a.permute(perm), c.scale(&Rational::from_int(sign)))
            }),
        )
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .rev()
            .map(|(a, c)| format!("({c}) {}", render_xi(a, names)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for ConstSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConstSymbol({})", self.render(&[]))
    }
}
