use super::*;
use crate::diffop::{ConstSymbol, MultiIndex};
use crate::elliptic::GPoly;
use crate::grading::WeightedDegree;
use crate::numeric::{vanishing_oracle, EllipticContext, Status};
use crate::scalars::DEFAULT_PRECISION_BITS;

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

fn wp(a: &[i64]) -> EllipticPoly {
    EllipticPoly::wp(a).unwrap()
}

fn xi_poly(n: usize, terms: &[(&[u8], i64)]) -> ConstSymbol {
    ConstSymbol::from_terms(n, terms.iter().map(|(a, c)| (MultiIndex::new(a), GPoly::constant(q(*c)))))
}

#[test]
fn transcription_listing() {
    for t in ALL_TABLES {
        let listing = t.listing();
        println!("{listing}");
        for row in t.rows {
            assert!(listing.contains(row));
        }
        assert!(t.build().is_ok(), "{} builds", t.name);
        assert!(t.build_printed().is_ok());
    }
}

#[test]
fn a2_l1_examples() {
    let l1 = a2_l1();
    assert_eq!(l1.coefficient_of(&[2, 0, 0]), EllipticPoly::constant(q(-1)));
    let pot = wp(&[1, -1, 0]).add(&wp(&[0, 1, -1])).add(&wp(&[-1, 0, 1])).scale(&q(4));
    assert_eq!(l1.coefficient_of(&[0, 0, 0]), pot);
    assert_eq!(l1.weighted_degree(), WeightedDegree::Homogeneous(2));
    assert_eq!(l1.order(), Some(2));
}

#[test]
fn a2_l2_l3_examples() {
    let s = a2_l2().principal_symbol().unwrap().structural_constant().unwrap();
    assert_eq!(s, xi_poly(3, &[(&[1, 0, 0], 1), (&[0, 1, 0], 1), (&[0, 0, 1], 1)]));
    let l3 = a2_l3();
    assert_eq!(l3.order(), Some(3));
    assert_eq!(l3.coefficient_of(&[1, 0, 0]), wp(&[0, 1, -1]).scale(&q(2)));
    assert_eq!(l3.coefficient_of(&[0, 1, 0]), wp(&[1, 0, -1]).scale(&q(2)));
}

#[test]
fn a2_i12_examples() {
    let i12 = a2_i(A2Pair::I12);
    let s = i12.principal_symbol().unwrap().structural_constant().unwrap();
    let a = ConstSymbol::xi(3, 0).sub(&ConstSymbol::xi(3, 2));
    let b = ConstSymbol::xi(3, 1).sub(&ConstSymbol::xi(3, 2));
    assert_eq!(s, a.pow(2).mul(&b.pow(2)));
    // ℘″ rows become 6℘² − g2/2 each: −2−6−6 = −14 copies of −g2/2, i.e. +7g2.
    let c0 = i12.coefficient_of(&[0, 0, 0]);
    let g2_only = c0.terms().iter().find(|(m, _)| m.is_free_of_wp()).unwrap();
    assert_eq!(g2_only.1, q(7));
    assert_eq!(i12.weighted_degree(), WeightedDegree::Homogeneous(4));
}

#[test]
fn i12_is_symmetric_under_transposition() {
    let i12 = a2_i(A2Pair::I12);
    assert_eq!(i12.permute_vars(&[1, 0, 2]).unwrap(), i12);
}

#[test]
fn cyclic_images_are_distinct_and_close() {
    let ops: Vec<_> = A2Pair::ALL.iter().map(|p| a2_i(*p)).collect();
    assert_ne!(ops[0], ops[1]);
    assert_ne!(ops[1], ops[2]);
    assert_eq!(ops[2].permute_vars(&A2_CYCLE).unwrap(), ops[0]);
}

#[test]
fn b2_examples() {
    let l = b2_l();
    assert_eq!(l.coefficient_of(&[2, 0]), EllipticPoly::constant(q(-1)));
    let pot = wp(&[1, 0]).scale(&q(2)).add(&wp(&[0, 1]).scale(&q(2)))
        .add(&wp(&[1, 1]).scale(&q(4))).add(&wp(&[1, -1]).scale(&q(4)));
    assert_eq!(l.coefficient_of(&[0, 0]), pot);
    assert_eq!(l.weighted_degree(), WeightedDegree::Homogeneous(2));

    let m = b2_m();
    let s = m.principal_symbol().unwrap().structural_constant().unwrap();
    assert_eq!(s, xi_poly(2, &[(&[2, 2], 1)]));
    assert_eq!(m.coefficient_of(&[1, 1]), wp(&[1, 1]).sub(&wp(&[1, -1])).scale(&q(-4)));
    assert_eq!(m.weighted_degree(), WeightedDegree::Homogeneous(4));
}

#[test]
fn b2_ix_examples() {
    let ix = b2_ix();
    let dx = ix.coefficient_of(&[1, 0]);
    let g2 = dx.terms().iter().find(|(m, _)| m.is_free_of_wp()).unwrap();
    // −9/2 g2 plus the ℘″ rewrites (10 + 10 − 5)(−g2/2)
    assert_eq!(g2.1, Rational::new(-9, 2) + Rational::new(-15, 2));
    assert_eq!(ix.weighted_degree(), WeightedDegree::Homogeneous(5));
    assert!(!B2_IX.build_printed().unwrap().weighted_degree().is_homogeneous());
    let sy = b2_iy().principal_symbol().unwrap().structural_constant().unwrap();
    assert_eq!(sy, xi_poly(2, &[(&[0, 5], 1), (&[2, 3], -5)]));
}

#[test]
fn swap_is_an_involution() {
    let ix = b2_ix();
    assert_eq!(ix.permute_vars(&B2_SWAP).unwrap().permute_vars(&B2_SWAP).unwrap(), ix);
    assert_eq!(b2_iy().permute_vars(&B2_SWAP).unwrap(), ix);
    let l3 = b2_l3();
    assert_eq!(l3.sub(&b2_ix()).unwrap(), b2_iy().scale_rational(&q(2)));
}

#[test]
fn catalog_symbols_are_constant_and_weights_match() {
    let cases = [
        (a2_l1(), 2),
        (a2_l2(), 1),
        (a2_l3(), 3),
        (a2_i(A2Pair::I12), 4),
        (a2_i(A2Pair::I23), 4),
        (a2_i(A2Pair::I31), 4),
        (b2_l(), 2),
        (b2_m(), 4),
        (b2_ix(), 5),
        (b2_iy(), 5),
        (b2_l3(), 5),
    ];
    for (op, w) in cases {
        assert_eq!(op.weighted_degree(), WeightedDegree::Homogeneous(w));
        assert!(op.principal_symbol().unwrap().structural_constant().is_some());
    }
}

#[test]
fn by_name_lookup() {
    assert_eq!(by_name(System::A2, "I13"), Some(a2_i(A2Pair::I31)));
    assert_eq!(by_name(System::B2, "J"), Some(b2_iy()));
    assert!(by_name(System::B2, "I12").is_none());
}

#[test]
fn amended_ix_commutes_with_l_and_printed_does_not() {
    let ctxs = EllipticContext::default_contexts(DEFAULT_PRECISION_BITS).unwrap();
    let l = b2_l();
    let amended = l.commutator(&b2_ix()).unwrap();
    assert_eq!(vanishing_oracle(&ctxs, &amended, 3, 7).status, Status::Pass);
    let printed = l.commutator(&B2_IX.build_printed().unwrap()).unwrap();
    assert_eq!(vanishing_oracle(&ctxs, &printed, 3, 7).status, Status::Fail);
}

#[test]
fn expression_errors_surface() {
    assert!(matches!(operator_from_expr(System::A2, "q(x1)"), Err(CatalogError::UnknownName(_))));
    assert!(matches!(operator_from_expr(System::A2, "dz"), Err(CatalogError::UnknownName(_))));
    assert!(operator_from_expr(System::B2, "p(x-x)").is_err());
}

