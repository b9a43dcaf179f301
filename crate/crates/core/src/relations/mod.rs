//! Spectral relations between the quantum integrals: coefficient builders,
//! operator evaluation, verification and re-derivation by symbol descent.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::cache::CacheError;
use crate::catalog::{self, A2Pair, CatalogError, System};
use crate::diffop::{DiffOp, DiffOpError};
use crate::elliptic::{EllipticError, EllipticPoly, GPoly};
use crate::grading::{WeightedDegree, WEIGHT_G2, WEIGHT_G3};
use crate::numeric::NumericError;
use crate::scalars::Rational;

mod checks;
mod descent;
mod poly;
mod report;
mod verify;

pub use checks::{
    basis_symbols, fiber_orbit, jacobian_rank, separation_check, sv_remark_check, symbol_independence_check, IndependenceOutcome, SeparationOutcome,
    SvRemarkOutcome,
};
pub use descent::{express_in_integrals, DescentOutcome, DescentStep};
pub use poly::{AbstractIntegralPoly, Image, PolyError, TermDiff, POLY_FORMAT_VERSION};
pub use report::{CheckConfig, VerificationReport};
pub use verify::{
    certify, derive_elementary_symmetric, derive_elementary_symmetric_with, verify_commutators, verify_relation,
    ElementarySymmetric, ProductMemo,
};

#[derive(Debug, Error)]
pub enum RelationError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    DiffOp(#[from] DiffOpError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("generator {0:?} is not bound to an operator")]
    Unbound(String),
    #[error("bound operator {0:?} acts on {1} variables, expected {2}")]
    VariableCount(String, usize, usize),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("not expressible: {0}")]
    NotExpressible(String),
    #[error("descent stalled: {0}")]
    Stalled(String),
}

/// Generators of the A2 coefficients.
pub const A2_BASE: [&str; 5] = ["L1", "L2", "L3", "g2", "g3"];
/// Generators of the B2 coefficients; L is half the Hamiltonian.
pub const B2_BASE: [&str; 4] = ["L", "M", "g2", "g3"];

/// Weighted degree of each generator name used by the relations.
pub fn generator_weight(system: System, name: &str) -> Option<u32> {
    Some(match (system, name) {
        (_, "g2") => WEIGHT_G2,
        (_, "g3") => WEIGHT_G3,
        (System::A2, "L1") => 2,
        (System::A2, "L2") => 1,
        (System::A2, "L3") => 3,
        (System::A2, "I" | "J") => 4,
        (System::B2, "L") => 2,
        (System::B2, "M") => 4,
        (System::B2, "I" | "J") => 5,
        _ => return None,
    })
}

pub fn weighted_degree(system: System, p: &AbstractIntegralPoly) -> Result<WeightedDegree, RelationError> {
    let w = p
        .generators()
        .iter()
        .map(|g| generator_weight(system, g).ok_or_else(|| PolyError::UnknownGenerator(g.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(p.weighted_degree(&w))
}

pub const X_TEXT: &str = "3/2 L1 + 1/2 L2^2";
pub const Y_TEXT: &str =
    "1/2 L1^3 + 27 L3^2 + 1/4 L2^6 + L1 L2^4 - 5 L2^3 L3 + 5/4 L1^2 L2^2 - 9 L1 L2 L3";
pub const A1_TEXT: &str = "6 g2 - X^2";
pub const A2_TEXT: &str = "2 X Y - 15 g2^2 - 2 g2 X^2";
pub const A3_TEXT: &str = "-Y^2 - 2 g2 X Y - 108 g3 Y + 16 g3 X^3 + 15 g2^2 X^2 - 100 g2^3";

pub const B1_TEXT: &str = "32 L^5 - 120 M L^3 + 120 M^2 L + g2(-82 L^3 + 114 L M) \
    + g3(-270 L^2 + 486 M) + 102 g2^2 L + 486 g3 g2";
pub const B2_TEXT: &str = "400 M^3 L^4 - 1440 M^4 L^2 + 1296 M^5 \
    + g2(-400 M L^6 + 840 M^2 L^4 - 576 M^3 L^2 + 648 M^4) \
    + g3(800 L^7 - 8280 M L^5 + 22032 M^2 L^3 - 17496 L M^3) \
    + g2^2(800 L^6 - 1815 M L^4 + 3510 M^2 L^2 - 3807 M^3) \
    + g3 g2(3870 L^5 + 324 M L^3 - 13122 M^2 L) \
    + g3^2(18225 L^4 - 65610 M L^2 + 59049 M^2) \
    + g2^3(-2930 L^4 + 5418 M L^2 - 4536 M^2) \
    + g3 g2^2(-21708 L^3 + 26244 L M) \
    + g3^3 g2(-65610 L^2 + 118098 M) + g2^4(2772 L^2 - 1539 M) \
    + 21870 g3 g2^3 L + 59049 g2^2 g3^2 - 162 g2^5";

/// The printed cubic-relation coefficients, expanded over [`A2_BASE`].
#[derive(Debug, Clone)]
pub struct ACoefficients {
    pub a1: AbstractIntegralPoly,
    pub a2: AbstractIntegralPoly,
    pub a3: AbstractIntegralPoly,
    pub x: AbstractIntegralPoly,
    pub y: AbstractIntegralPoly,
}

impl ACoefficients {
    pub fn all(&self) -> [&AbstractIntegralPoly; 3] {
        [&self.a1, &self.a2, &self.a3]
    }
}

pub fn build_a_coefficients() -> ACoefficients {
    let parse = |t: &str, defs: &[(&str, &AbstractIntegralPoly)]| {
        AbstractIntegralPoly::parse(&A2_BASE, t, defs).expect("printed A2 formula parses")
    };
    let x = parse(X_TEXT, &[]);
    let y = parse(Y_TEXT, &[]);
    let defs = [("X", &x), ("Y", &y)];
    ACoefficients { a1: parse(A1_TEXT, &defs), a2: parse(A2_TEXT, &defs), a3: parse(A3_TEXT, &defs), x, y }
}

/// The printed quartic-relation coefficients over [`B2_BASE`]; `b2_offenders`
/// lists printed B2 terms whose weight differs from the dominant one.
#[derive(Debug, Clone)]
pub struct BCoefficients {
    pub b1: AbstractIntegralPoly,
    pub b2: AbstractIntegralPoly,
    pub b2_offenders: Vec<(u32, String)>,
}

pub fn build_b_coefficients() -> BCoefficients {
    let parse = |t: &str| AbstractIntegralPoly::parse(&B2_BASE, t, &[]).expect("printed B2 formula parses");
    let b1 = parse(B1_TEXT);
    let b2 = parse(B2_TEXT);
    let b2_offenders = match weighted_degree(System::B2, &b2).expect("known generators") {
        WeightedDegree::Inhomogeneous { offenders, .. } => offenders,
        _ => Vec::new(),
    };
    BCoefficients { b1, b2, b2_offenders }
}

fn embed(p: &AbstractIntegralPoly, gens: &[&str]) -> AbstractIntegralPoly {
    p.with_generators(gens).expect("coefficient generators are a subset")
}

pub const A2_CUBIC_GENS: [&str; 6] = ["I", "L1", "L2", "L3", "g2", "g3"];
pub const A2_PAIR_GENS: [&str; 7] = ["I", "J", "L1", "L2", "L3", "g2", "g3"];
pub const B2_QUARTIC_GENS: [&str; 5] = ["I", "L", "M", "g2", "g3"];
pub const B2_SUM_GENS: [&str; 6] = ["I", "J", "L", "M", "g2", "g3"];

fn relation(gens: &[&str], text: &str, defs: &[(&str, &AbstractIntegralPoly)]) -> AbstractIntegralPoly {
    let embedded: Vec<(&str, AbstractIntegralPoly)> = defs.iter().map(|(n, p)| (*n, embed(p, gens))).collect();
    let refs: Vec<(&str, &AbstractIntegralPoly)> = embedded.iter().map(|(n, p)| (*n, p)).collect();
    AbstractIntegralPoly::parse(gens, text, &refs).expect("relation template parses")
}

/// `I^3 + A1 I^2 + A2 I + A3`.
pub fn a2_cubic_relation(a: &ACoefficients) -> AbstractIntegralPoly {
    relation(&A2_CUBIC_GENS, "I^3 + A1 I^2 + A2 I + A3", &[("A1", &a.a1), ("A2", &a.a2), ("A3", &a.a3)])
}

/// `I^2 + I J + J^2 + A1 (I + J) + A2`.
pub fn a2_pair_relation(a: &ACoefficients) -> AbstractIntegralPoly {
    relation(&A2_PAIR_GENS, "I^2 + I J + J^2 + A1(I + J) + A2", &[("A1", &a.a1), ("A2", &a.a2)])
}

/// `I^4 + B1 I^2 + B2`.
pub fn b2_quartic_relation(b1: &AbstractIntegralPoly, b2: &AbstractIntegralPoly) -> AbstractIntegralPoly {
    relation(&B2_QUARTIC_GENS, "I^4 + B1 I^2 + B2", &[("B1", b1), ("B2", b2)])
}

/// `I^2 + J^2 + B1`.
pub fn b2_sum_relation(b1: &AbstractIntegralPoly) -> AbstractIntegralPoly {
    relation(&B2_SUM_GENS, "I^2 + J^2 + B1", &[("B1", b1)])
}

/// Assignment of operators to generator names; g2 and g3 are always scalars.
#[derive(Debug, Clone)]
pub struct Binding {
    n: usize,
    ops: Vec<(String, DiffOp)>,
}

impl Binding {
    pub fn new(n: usize) -> Self {
        Binding { n, ops: Vec::new() }
    }

    pub fn bind(mut self, name: &str, op: DiffOp) -> Result<Self, RelationError> {
        if op.n_vars() != self.n {
            return Err(RelationError::VariableCount(name.to_string(), op.n_vars(), self.n));
        }
        self.ops.retain(|(n, _)| n != name);
        self.ops.push((name.to_string(), op));
        Ok(self)
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn get(&self, name: &str) -> Option<&DiffOp> {
        self.ops.iter().find(|(n, _)| n == name).map(|(_, o)| o)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.ops.iter().map(|(n, _)| n.as_str())
    }

    /// L1, L2, L3 and, if given, I and J as pair integrals.
    pub fn a2(i: Option<A2Pair>, j: Option<A2Pair>) -> Self {
        let mut b = Binding::new(3)
            .bind("L1", catalog::a2_l1())
            .and_then(|b| b.bind("L2", catalog::a2_l2()))
            .and_then(|b| b.bind("L3", catalog::a2_l3()))
            .expect("A2 operators act on three variables");
        if let Some(i) = i {
            b = b.bind("I", catalog::a2_i(i)).expect("three variables");
        }
        if let Some(j) = j {
            b = b.bind("J", catalog::a2_i(j)).expect("three variables");
        }
        b
    }

    /// L = ½·L1, M = L2, I = I_x, J = I_y.
    pub fn b2() -> Self {
        Binding::new(2)
            .bind("L", catalog::b2_l().scale_rational(&Rational::new(1, 2)))
            .and_then(|b| b.bind("M", catalog::b2_m()))
            .and_then(|b| b.bind("I", catalog::b2_ix()))
            .and_then(|b| b.bind("J", catalog::b2_iy()))
            .expect("B2 operators act on two variables")
    }
}

/// Realizes an abstract polynomial as an operator. Within a term the
/// generators are composed in generator-list order, leftmost first; the sum
/// is organized as a nested Horner scheme so every composition has a single
/// generator on the left.
pub fn evaluate_abstract(p: &AbstractIntegralPoly, binding: &Binding) -> Result<DiffOp, RelationError> {
    let mut ops = Vec::new();
    let (mut g2i, mut g3i) = (None, None);
    for (i, g) in p.generators().iter().enumerate() {
        match g.as_str() {
            "g2" => g2i = Some(i),
            "g3" => g3i = Some(i),
            _ => {
                if p.degree_in(g)? == 0 {
                    continue;
                }
                let op = binding.get(g).ok_or_else(|| RelationError::Unbound(g.clone()))?;
                ops.push((i, op));
            }
        }
    }
    let terms: Vec<(&Vec<u32>, &Rational)> = p.terms().collect();
    horner(&terms, &ops, g2i, g3i, binding.n_vars())
}

fn horner(
    terms: &[(&Vec<u32>, &Rational)],
    ops: &[(usize, &DiffOp)],
    g2i: Option<usize>,
    g3i: Option<usize>,
    n: usize,
) -> Result<DiffOp, RelationError> {
    let Some(((i, op), rest)) = ops.split_first() else {
        let exp = |e: &Vec<u32>, k: Option<usize>| k.map_or(0, |k| e[k] as u16);
        let g = GPoly::from_terms(terms.iter().map(|(e, c)| ((exp(e, g2i), exp(e, g3i)), (*c).clone())));
        return Ok(if g.is_zero() { DiffOp::zero(n) } else { DiffOp::scalar(n, EllipticPoly::from_gpoly(&g)) });
    };
    let mut groups: BTreeMap<u32, Vec<(&Vec<u32>, &Rational)>> = BTreeMap::new();
    for t in terms {
        groups.entry(t.0[*i]).or_default().push(*t);
    }
    let top = groups.keys().next_back().copied().unwrap_or(0);
    let mut acc = DiffOp::zero(n);
    for k in (0..=top).rev() {
        if !acc.is_zero() {
            acc = op.compose(&acc)?;
        }
        if let Some(g) = groups.get(&k) {
            acc = acc.add(&horner(g, rest, g2i, g3i, n)?)?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests;
