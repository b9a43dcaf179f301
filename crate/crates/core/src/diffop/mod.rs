//! Linear differential operators Σ f_α(x) ∂^α with elliptic coefficients.
//!
//! Coefficients stand to the left of the derivatives. Composition uses the
//! generalized Leibniz rule
//!
//! ```text
//! (f ∂^α) ∘ (g ∂^β) = Σ_{δ ≤ α} C(α, δ) f · ∂^δ(g) · ∂^(α−δ+β)
//! ```
//!
//! with the right operand's coefficient derivatives tabulated once per call.

mod symbol;
mod text;

pub use symbol::{ConstSymbol, SymbolPoly};
pub use text::{DIFFOP_FORMAT_VERSION, ParsedDiffOp};

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::elliptic::{accumulate, EllipticError, EllipticPoly, TermMap, MAX_VARS};
use crate::grading::{WeightedDegree, WEIGHT_DERIVATIVE};
use crate::scalars::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffOpError {
    #[error("variable count mismatch: {0} vs {1}")]
    VariableMismatch(usize, usize),
    #[error("the zero operator has no principal symbol")]
    ZeroOperator,
    #[error("at most {MAX_VARS} variables are supported, got {0}")]
    TooManyVariables(usize),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("integrity check failed: expected {expected}, computed {computed}")]
    Integrity { expected: String, computed: String },
}

/// Orders of differentiation, one per variable.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    orders: [u8; MAX_VARS],
    len: u8,
}

impl MultiIndex {
    pub fn new(orders: &[u8]) -> Self {
        assert!(orders.len() <= MAX_VARS, "too many variables");
        let mut o = [0u8; MAX_VARS];
        o[..orders.len()].copy_from_slice(orders);
        MultiIndex { orders: o, len: orders.len() as u8 }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(&vec![0; n])
    }

    pub fn unit(n: usize, var: usize) -> Self {
        let mut m = Self::zero(n);
        m.orders[var] = 1;
        m
    }

    pub fn n_vars(&self) -> usize {
        self.len as usize
    }

    pub fn orders(&self) -> &[u8] {
        &self.orders[..self.len as usize]
    }

    pub fn get(&self, var: usize) -> u8 {
        self.orders[var]
    }

    pub fn total(&self) -> u32 {
        self.orders().iter().map(|&o| o as u32).sum()
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        let mut m = *self;
        for i in 0..self.n_vars() {
            m.orders[i] += other.orders[i];
        }
        m
    }

    pub fn minus(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut m = *self;
        for i in 0..self.n_vars() {
            m.orders[i] = self.orders[i].checked_sub(other.orders[i])?;
        }
        Some(m)
    }

    pub fn with_incremented(&self, var: usize) -> MultiIndex {
        let mut m = *self;
        m.orders[var] += 1;
        m
    }

    /// All δ with δ ≤ self componentwise.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero(self.n_vars())];
        for var in 0..self.n_vars() {
            let mut next = Vec::with_capacity(out.len() * (self.orders[var] as usize + 1));
            for base in &out {
                for k in 0..=self.orders[var] {
                    let mut m = *base;
                    m.orders[var] = k;
                    next.push(m);
                }
            }
            out = next;
        }
        out
    }

    /// Π_i C(self_i, sub_i).
    pub fn binomial(&self, sub: &MultiIndex) -> i64 {
        self.orders()
            .iter()
            .zip(sub.orders())
            .map(|(&n, &k)| binomial(n as i64, k as i64))
            .product()
    }

    pub fn permute(&self, perm: &[usize]) -> MultiIndex {
        let mut m = MultiIndex::zero(self.n_vars());
        for i in 0..self.n_vars() {
            m.orders[perm[i]] = self.orders[i];
        }
        m
    }

    /// `d1^2 d3` style rendering with the given derivative names.
    pub fn render(&self, names: &[String]) -> String {
        let mut parts = Vec::new();
        for (i, &o) in self.orders().iter().enumerate() {
            if o == 0 {
                continue;
            }
            let name = names.get(i).map(|n| format!("d{n}")).unwrap_or_else(|| format!("d{}", i + 1));
            parts.push(if o == 1 { name } else { format!("{name}^{o}") });
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.orders())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.orders().iter().map(|o| o.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

pub(crate) fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1i64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Progress callback: (completed units, total units).
pub type Progress<'a> = &'a (dyn Fn(usize, usize) + Sync);

/// A differential operator in `n` variables.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DiffOp {
    n: usize,
    terms: Vec<(MultiIndex, EllipticPoly)>,
}

type OpMap = FxHashMap<MultiIndex, TermMap>;

impl DiffOp {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_VARS, "too many variables");
        DiffOp { n, terms: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, EllipticPoly::one())
    }

    /// Multiplication by a function.
    pub fn scalar(n: usize, f: EllipticPoly) -> Self {
        Self::term(n, MultiIndex::zero(n), f)
    }

    pub fn rational(n: usize, r: Rational) -> Self {
        Self::scalar(n, EllipticPoly::constant(r))
    }

    /// ∂/∂x_var.
    pub fn derivative(n: usize, var: usize) -> Self {
        Self::term(n, MultiIndex::unit(n, var), EllipticPoly::one())
    }

    pub fn term(n: usize, alpha: MultiIndex, f: EllipticPoly) -> Self {
        assert_eq!(alpha.n_vars(), n, "multi-index length");
        if f.is_zero() {
            return Self::zero(n);
        }
        DiffOp { n, terms: vec![(alpha, f)] }
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, EllipticPoly)>) -> Self {
        let mut map: std::collections::BTreeMap<MultiIndex, EllipticPoly> = Default::default();
        for (a, f) in terms {
            assert_eq!(a.n_vars(), n, "multi-index length");
            let slot = map.entry(a).or_default();
            *slot = slot.add(&f);
        }
        DiffOp { n, terms: map.into_iter().filter(|(_, f)| !f.is_zero()).collect() }
    }

    fn from_map(n: usize, map: OpMap) -> Self {
        let mut terms: Vec<(MultiIndex, EllipticPoly)> = map
            .into_iter()
            .map(|(a, tm)| (a, EllipticPoly::from_map(tm)))
            .filter(|(_, f)| !f.is_zero())
            .collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        DiffOp { n, terms }
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

    pub fn num_monomials(&self) -> usize {
        self.terms.iter().map(|(_, f)| f.len()).sum()
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> EllipticPoly {
        self.terms
            .binary_search_by(|(a, _)| a.cmp(alpha))
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_default()
    }

    pub fn coefficient_of(&self, orders: &[u8]) -> EllipticPoly {
        self.coefficient(&MultiIndex::new(orders))
    }

    /// Highest total derivative order, `None` for the zero operator.
    pub fn order(&self) -> Option<u32> {
        self.terms.iter().map(|(a, _)| a.total()).max()
    }

    fn check_n(&self, other: &DiffOp) -> Result<(), DiffOpError> {
        if self.n != other.n {
            return Err(DiffOpError::VariableMismatch(self.n, other.n));
        }
        Ok(())
    }

    pub fn add(&self, other: &DiffOp) -> Result<DiffOp, DiffOpError> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &DiffOp) -> Result<DiffOp, DiffOpError> {
        self.combine(other, true)
    }

    fn combine(&self, other: &DiffOp, negate: bool) -> Result<DiffOp, DiffOpError> {
        self.check_n(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        let signed = |f: &EllipticPoly| if negate { f.neg() } else { f.clone() };
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    terms.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    terms.push((b[j].0, signed(&b[j].1)));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let f = if negate { a[i].1.sub(&b[j].1) } else { a[i].1.add(&b[j].1) };
                    if !f.is_zero() {
                        terms.push((a[i].0, f));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        terms.extend(a[i..].iter().cloned());
        terms.extend(b[j..].iter().map(|(m, f)| (*m, signed(f))));
        Ok(DiffOp { n: self.n, terms })
    }

    pub fn neg(&self) -> DiffOp {
        DiffOp {
            n: self.n,
            terms: self.terms.iter().map(|(a, f)| (*a, f.neg())).collect(),
        }
    }

    /// Left multiplication by a function: c · A.
    pub fn scale(&self, c: &EllipticPoly) -> DiffOp {
        DiffOp::from_terms(self.n, self.terms.iter().map(|(a, f)| (*a, c.mul(f))))
    }

    pub fn scale_rational(&self, r: &Rational) -> DiffOp {
        if r.is_zero() {
            return DiffOp::zero(self.n);
        }
        DiffOp {
            n: self.n,
            terms: self.terms.iter().map(|(a, f)| (*a, f.scale(r))).collect(),
        }
    }

    pub fn compose(&self, other: &DiffOp) -> Result<DiffOp, DiffOpError> {
        self.compose_with_progress(other, None)
    }

    pub fn compose_with_progress(
        &self,
        other: &DiffOp,
        progress: Option<Progress<'_>>,
    ) -> Result<DiffOp, DiffOpError> {
        self.check_n(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(DiffOp::zero(self.n));
        }
        let n = self.n;

        // Every δ below some left multi-index, ordered by total degree so each
        // entry can be derived from one already present.
        let mut needed: BTreeSet<(u32, MultiIndex)> = BTreeSet::new();
        for (alpha, _) in &self.terms {
            for d in alpha.sub_indices() {
                needed.insert((d.total(), d));
            }
        }
        let mut table: FxHashMap<MultiIndex, Vec<EllipticPoly>> = FxHashMap::default();
        table.insert(
            MultiIndex::zero(n),
            other.terms.iter().map(|(_, g)| g.clone()).collect(),
        );
        let mut by_level: Vec<Vec<MultiIndex>> = Vec::new();
        for (t, d) in &needed {
            if *t == 0 {
                continue;
            }
            let t = *t as usize;
            if by_level.len() < t {
                by_level.resize(t, Vec::new());
            }
            by_level[t - 1].push(*d);
        }
        for level in by_level {
            let computed: Vec<(MultiIndex, Vec<EllipticPoly>)> = level
                .par_iter()
                .map(|d| {
                    let var = (0..n).find(|&v| d.get(v) > 0).expect("nonzero index");
                    let mut prev = *d;
                    prev.orders[var] -= 1;
                    let base = &table[&prev];
                    (*d, base.iter().map(|g| g.differentiate(var)).collect())
                })
                .collect();
            table.extend(computed);
        }

        let tasks: Vec<(usize, MultiIndex)> = self
            .terms
            .iter()
            .enumerate()
            .flat_map(|(i, (alpha, _))| alpha.sub_indices().into_iter().map(move |d| (i, d)))
            .collect();
        let total = tasks.len();
        let done = AtomicUsize::new(0);

        let acc = tasks
            .par_iter()
            .fold(OpMap::default, |mut acc, (i, delta)| {
                let (alpha, f) = &self.terms[*i];
                let gamma = alpha.minus(delta).expect("δ ≤ α");
                let binom = Rational::from_int(alpha.binomial(delta));
                let derivs = &table[delta];
                for ((beta, _), h) in other.terms.iter().zip(derivs) {
                    if h.is_zero() {
                        continue;
                    }
                    let slot = acc.entry(gamma.plus(beta)).or_default();
                    f.mul_into(h, &binom, slot);
                }
                if let Some(cb) = progress {
                    let k = done.fetch_add(1, Ordering::Relaxed) + 1;
                    cb(k, total);
                }
                acc
            })
            .reduce(OpMap::default, merge_opmaps);
        Ok(DiffOp::from_map(n, acc))
    }

    pub fn commutator(&self, other: &DiffOp) -> Result<DiffOp, DiffOpError> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// `self^k`. Each step composes `self` on the left of the running power,
    /// which keeps the tabulated derivatives to the order of `self`.
    pub fn power(&self, k: u32) -> DiffOp {
        assert!(k >= 1, "power must be positive");
        let mut acc = self.clone();
        for _ in 1..k {
            acc = self.compose(&acc).expect("same variable count");
        }
        acc
    }

    pub fn principal_symbol(&self) -> Result<SymbolPoly, DiffOpError> {
        let order = self.order().ok_or(DiffOpError::ZeroOperator)?;
        Ok(self.symbol_at_order(order))
    }

    /// Restriction to multi-indices of total order `k` (possibly empty).
    pub fn symbol_at_order(&self, k: u32) -> SymbolPoly {
        SymbolPoly::from_terms(
            self.n,
            self.terms
                .iter()
                .filter(|(a, _)| a.total() == k)
                .map(|(a, f)| (*a, f.clone())),
        )
    }

    /// Drops every term of total order `k`.
    pub fn without_order(&self, k: u32) -> DiffOp {
        DiffOp {
            n: self.n,
            terms: self.terms.iter().filter(|(a, _)| a.total() != k).cloned().collect(),
        }
    }

    pub fn weighted_degree(&self) -> WeightedDegree {
        let names: Vec<String> = Vec::new();
        WeightedDegree::from_terms(self.terms.iter().flat_map(|(a, f)| {
            let names = &names;
            f.terms().iter().map(move |(m, c)| {
                (
                    m.weight() + WEIGHT_DERIVATIVE * a.total(),
                    format!("{c} {} {}", m.render(names), a.render(names)),
                )
            })
        }))
    }

    /// Applies `x_i ↦ x_{perm[i]}` to derivatives and coefficients.
    pub fn permute_vars(&self, perm: &[usize]) -> Result<DiffOp, DiffOpError> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (a, f) in &self.terms {
            terms.push((a.permute(perm), f.permute_vars(perm)?));
        }
        Ok(DiffOp::from_terms(self.n, terms))
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut terms: Vec<&(MultiIndex, EllipticPoly)> = self.terms.iter().collect();
        terms.sort_by(|a, b| b.0.total().cmp(&a.0.total()).then(b.0.cmp(&a.0)));
        terms
            .iter()
            .map(|(a, f)| format!("({}) {}", f.render(names), a.render(names)))
            .collect::<Vec<_>>()
            .join("\n+ ")
    }
}

fn merge_opmaps(mut a: OpMap, b: OpMap) -> OpMap {
    if a.len() < b.len() {
        return merge_opmaps(b, a);
    }
    for (k, tm) in b {
        let slot = a.entry(k).or_default();
        if slot.is_empty() {
            *slot = tm;
        } else {
            for (m, c) in tm {
                accumulate(slot, m, c);
            }
        }
    }
    a
}

impl fmt::Debug for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffOp[n={}]({})", self.n, self.render(&[]))
    }
}
