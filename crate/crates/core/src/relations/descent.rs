use std::collections::BTreeMap;

use crate::catalog::System;
use crate::diffop::{ConstSymbol, DiffOp, MultiIndex};
use crate::elliptic::{reduce_symmetric, specialize_half_periods, GPoly, HalfPeriodAssignment};
use crate::linalg::{self, Solution};
use crate::scalars::Rational;

use super::verify::certify;
use super::{evaluate_abstract, AbstractIntegralPoly, Binding, CheckConfig, RelationError, VerificationReport};

#[derive(Debug, Clone)]
pub struct DescentStep {
    pub order: u32,
    /// Candidate monomials of the matching order and weight.
    pub unknowns: usize,
    /// Dimension of the solution space; nonzero means the basis symbols
    /// were not independent at this order.
    pub nullity: usize,
    /// Terms added to the result at this step.
    pub added: AbstractIntegralPoly,
    /// Present when the leftover top-order part needed numeric certification.
    pub certification: Option<VerificationReport>,
}

#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub poly: AbstractIntegralPoly,
    pub steps: Vec<DescentStep>,
    pub warnings: Vec<String>,
}

impl DescentOutcome {
    pub fn used_numerics(&self) -> bool {
        self.steps.iter().any(|s| s.certification.is_some())
    }
}

struct BasisEntry {
    order: u32,
    weight: u32,
    symbol: ConstSymbol,
}

/// Exponent vectors `e` with Σ e_i·orders_i = k.
fn exponent_vectors(orders: &[u32], k: u32) -> Vec<Vec<u32>> {
    let Some((&first, rest)) = orders.split_first() else {
        return if k == 0 { vec![vec![]] } else { vec![] };
    };
    let mut out = Vec::new();
    for e in 0..=k / first {
        for mut tail in exponent_vectors(rest, k - e * first) {
            tail.insert(0, e);
            out.push(tail);
        }
    }
    out
}

/// Writes `target` as a polynomial in the basis operators and g2, g3 by
/// repeatedly matching and removing the top-order symbol.
pub fn express_in_integrals(
    system: System,
    target: &DiffOp,
    basis: &[(&str, DiffOp)],
    cfg: &CheckConfig,
) -> Result<DescentOutcome, RelationError> {
    let n = system.n_vars();
    let hp = match system {
        System::A2 => HalfPeriodAssignment::a2(),
        System::B2 => HalfPeriodAssignment::b2(),
    };
    let mut binding = Binding::new(n);
    let mut entries = Vec::new();
    for (name, op) in basis {
        binding = binding.bind(name, op.clone())?;
        let sym = op.principal_symbol()?;
        let symbol = sym
            .structural_constant()
            .ok_or_else(|| RelationError::NotExpressible(format!("basis operator {name} has a non-constant symbol")))?;
        let weight = op
            .weighted_degree()
            .weight()
            .ok_or_else(|| RelationError::NotExpressible(format!("basis operator {name} is not homogeneous")))?;
        entries.push(BasisEntry { order: sym.degree().unwrap_or(0), weight, symbol });
        if entries.last().is_some_and(|e| e.order == 0) {
            return Err(RelationError::NotExpressible(format!("basis operator {name} has order 0")));
        }
    }
    let mut gens: Vec<&str> = basis.iter().map(|(n, _)| *n).collect();
    gens.extend(["g2", "g3"]);
    let mut poly = AbstractIntegralPoly::zero(&gens)?;
    let mut steps = Vec::new();
    let mut warnings = Vec::new();
    if target.is_zero() {
        return Ok(DescentOutcome { poly, steps, warnings });
    }
    let total = target
        .weighted_degree()
        .weight()
        .ok_or_else(|| RelationError::NotExpressible("target is not weighted-homogeneous".into()))?;

    let mut rem = target.clone();
    let orders: Vec<u32> = entries.iter().map(|e| e.order).collect();
    while let Some(k) = rem.order() {
        // Constant value of every top-order coefficient.
        let mut rhs: BTreeMap<(MultiIndex, (u16, u16)), Rational> = BTreeMap::new();
        for (alpha, f) in rem.symbol_at_order(k).terms() {
            let g = match f.as_gpoly() {
                Some(g) => g,
                None => {
                    let e = specialize_half_periods(f, &hp)?;
                    reduce_symmetric(&e).map_err(|err| {
                        RelationError::NotExpressible(format!(
                            "coefficient of {} at order {k} is not a symmetric constant: {err}",
                            alpha.render(&system.var_names())
                        ))
                    })?
                }
            };
            for (key, c) in g.terms() {
                rhs.insert((*alpha, *key), c.clone());
            }
        }

        // Candidate monomials and their symbols.
        let mut cands: Vec<(Vec<u32>, BTreeMap<(MultiIndex, (u16, u16)), Rational>)> = Vec::new();
        for e in exponent_vectors(&orders, k) {
            let w: u32 = e.iter().zip(&entries).map(|(k, b)| k * b.weight).sum();
            let Some(r) = total.checked_sub(w) else { continue };
            let mut sym = ConstSymbol::one(n);
            for (k, b) in e.iter().zip(&entries) {
                if *k > 0 {
                    sym = sym.mul(&b.symbol.pow(*k));
                }
            }
            for a in 0..=r / 4 {
                let rest = r - 4 * a;
                if rest % 6 != 0 {
                    continue;
                }
                let b = rest / 6;
                let s = sym.scale_g(&GPoly::monomial(a as u16, b as u16, Rational::one()));
                let mut map = BTreeMap::new();
                for (alpha, g) in s.terms() {
                    for (key, c) in g.terms() {
                        map.insert((*alpha, *key), c.clone());
                    }
                }
                let mut full = e.clone();
                full.extend([a, b]);
                cands.push((full, map));
            }
        }

        let mut rows: Vec<&(MultiIndex, (u16, u16))> = rhs.keys().chain(cands.iter().flat_map(|c| c.1.keys())).collect();
        rows.sort();
        rows.dedup();
        let a: Vec<Vec<Rational>> =
            rows.iter().map(|r| cands.iter().map(|c| c.1.get(*r).cloned().unwrap_or_default()).collect()).collect();
        let b: Vec<Rational> = rows.iter().map(|r| rhs.get(*r).cloned().unwrap_or_default()).collect();
        let (x, nullity) = match linalg::solve(&a, &b) {
            Solution::Solved { x, nullity } => (x, nullity),
            Solution::Inconsistent { row } => {
                let (alpha, (p, q)) = rows[row];
                return Err(RelationError::NotExpressible(format!(
                    "order-{k} symbol has no match in the basis (term {} g2^{p} g3^{q} = {})",
                    alpha.render(&system.var_names()),
                    b[row]
                )));
            }
        };
        if nullity > 0 {
            warnings.push(format!("order {k}: {nullity}-dimensional family of matches; chose the one with free terms zero"));
        }
        let added = AbstractIntegralPoly::from_terms(&gens, cands.iter().zip(x).map(|(c, v)| (c.0.clone(), v)))?;
        rem = rem.sub(&evaluate_abstract(&added, &binding)?)?;
        poly = poly.add(&added)?;

        let top = DiffOp::from_terms(n, rem.symbol_at_order(k).terms().iter().cloned());
        let certification = if top.is_zero() {
            None
        } else {
            let subject = format!("order-{k} remainder symbol");
            let r = certify("descent", system, &subject, &top, cfg);
            if !r.passed() {
                return Err(if top.terms().iter().all(|(_, f)| f.is_free_of_wp()) {
                    RelationError::Stalled(format!("order {k} did not cancel: {}", top.render(&system.var_names())))
                } else {
                    RelationError::NotExpressible(format!(
                        "order-{k} symbol is not constant (max ratio {:.3e})",
                        r.max_residual_ratio
                    ))
                });
            }
            Some(r)
        };
        rem = rem.without_order(k);
        steps.push(DescentStep { order: k, unknowns: cands.len(), nullity, added, certification });
    }
    Ok(DescentOutcome { poly, steps, warnings })
}
