use proptest::prelude::*;

use super::*;
use crate::diffop::ConstSymbol;
use crate::numeric::Status;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn a2_poly(text: &str) -> AbstractIntegralPoly {
    AbstractIntegralPoly::parse(&A2_BASE, text, &[]).unwrap()
}

fn quick_cfg() -> CheckConfig {
    let mut cfg = CheckConfig::standard().unwrap();
    cfg.trials = 3;
    cfg
}

fn symbol(op: &DiffOp) -> ConstSymbol {
    op.principal_symbol().unwrap().structural_constant().unwrap()
}

#[test]
fn x_and_y_examples() {
    let a = build_a_coefficients();
    assert_eq!(a.x.coefficient(&[1, 0, 0, 0, 0]), q(3, 2));
    assert_eq!(a.x.coefficient(&[0, 2, 0, 0, 0]), q(1, 2));
    assert_eq!(a.x.len(), 2);
    assert_eq!(a.y.coefficient(&[1, 1, 1, 0, 0]), q(-9, 1));
    assert_eq!(a.y.coefficient(&[0, 0, 2, 0, 0]), q(27, 1));
}

#[test]
fn a_coefficients_are_homogeneous() {
    let a = build_a_coefficients();
    let w: Vec<_> = a.all().iter().map(|p| weighted_degree(System::A2, p).unwrap()).collect();
    assert_eq!(
        w,
        vec![WeightedDegree::Homogeneous(4), WeightedDegree::Homogeneous(8), WeightedDegree::Homogeneous(12)]
    );
    // A1 = 6g2 − X² expanded by hand.
    let a1 = a2_poly("6 g2 - 9/4 L1^2 - 3/2 L1 L2^2 - 1/4 L2^4");
    assert_eq!(a.a1, a1);
}

#[test]
fn b_coefficient_examples_and_flagged_term() {
    let b = build_b_coefficients();
    assert_eq!(b.b1.coefficient(&[1, 0, 2, 0]), q(102, 1));
    assert_eq!(b.b1.coefficient(&[0, 0, 1, 1]), q(486, 1));
    assert_eq!(b.b2.coefficient(&[4, 0, 0, 2]), q(18225, 1));
    assert_eq!(weighted_degree(System::B2, &b.b1).unwrap(), WeightedDegree::Homogeneous(10));
    let weights: Vec<u32> = b.b2_offenders.iter().map(|(w, _)| *w).collect();
    assert_eq!(weights, vec![26, 26]);
    assert!(b.b2_offenders.iter().any(|(_, t)| t.contains("-65610") && t.contains("g3^3")));
    assert!(b.b2_offenders.iter().any(|(_, t)| t.contains("118098")));
}

#[test]
fn canonical_text_round_trip_and_rejections() {
    let a = build_a_coefficients();
    let text = a.a3.to_canonical_text();
    assert_eq!(AbstractIntegralPoly::parse_canonical_text(&text).unwrap(), a.a3);
    let swapped = text.replacen("generators L1 L2 L3 g2 g3", "generators L1 L2 L3 g2", 1);
    assert!(AbstractIntegralPoly::parse_canonical_text(&swapped).is_err());
    assert!(AbstractIntegralPoly::parse_canonical_text("cmspec-poly v9\ngenerators L\n").is_err());
    assert!(matches!(AbstractIntegralPoly::parse(&A2_BASE, "p(L1)", &[]), Err(PolyError::UnknownGenerator(_))));
    assert_eq!(a2_poly("g2(L1 + L2)"), a2_poly("g2 L1 + g2 L2"));
    assert!(matches!(AbstractIntegralPoly::parse(&A2_BASE, "Z", &[]), Err(PolyError::UnknownGenerator(_))));
    assert!(AbstractIntegralPoly::zero(&["L", "L"]).is_err());
}

#[test]
fn render_and_diff() {
    let p = a2_poly("6 g2 - 1/4 L2^4 + L1");
    assert_eq!(p.render(), "-1/4 L2^4 + L1 + 6 g2");
    let d = AbstractIntegralPoly::term_diff(&p, &a2_poly("6 g2 + L1")).unwrap();
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].monomial, "L2^4");
    assert_eq!(d[0].derived, "0");
}

#[test]
fn substitution_rejects_odd_square_images() {
    let gens = ["a", "b"];
    let p = AbstractIntegralPoly::parse(&A2_BASE, "L3^2 L1 + L3", &[]).unwrap();
    let img = AbstractIntegralPoly::parse(&gens, "b", &[]).unwrap();
    let r = p.substitute(&gens, &[("L3", Image::Square(img.clone())), ("L1", Image::Poly(img))]);
    assert!(matches!(r, Err(PolyError::OddPower(g)) if g == "L3"));
}

#[test]
fn evaluate_examples() {
    let b = Binding::a2(None, None);
    let l2 = catalog::a2_l2();
    assert_eq!(evaluate_abstract(&a2_poly("L2^2"), &b).unwrap(), l2.compose(&l2).unwrap());
    let g2l1 = evaluate_abstract(&a2_poly("g2 L1"), &b).unwrap();
    assert_eq!(g2l1, catalog::a2_l1().scale(&EllipticPoly::g2()));
    let sum = AbstractIntegralPoly::parse(&B2_SUM_GENS, "I + 2 J", &[]).unwrap();
    assert_eq!(evaluate_abstract(&sum, &Binding::b2()).unwrap(), catalog::b2_l3());
    let unbound = AbstractIntegralPoly::parse(&A2_CUBIC_GENS, "I L1", &[]).unwrap();
    assert!(matches!(evaluate_abstract(&unbound, &b), Err(RelationError::Unbound(g)) if g == "I"));
    assert!(matches!(Binding::new(2).bind("L1", catalog::a2_l1()), Err(RelationError::VariableCount(..))));
}

#[test]
fn horner_matches_termwise_products() {
    let b = Binding::a2(None, None);
    let p = a2_poly("2 L1^2 L3 - L2^3 + 3/2 g3 L1 L2 - g2^2 L2 + L3 L2^2 L1");
    let mut naive = DiffOp::zero(3);
    for (e, c) in p.terms() {
        let mut t = DiffOp::scalar(
            3,
            EllipticPoly::from_gpoly(&GPoly::monomial(e[3] as u16, e[4] as u16, c.clone())),
        );
        for (i, name) in ["L1", "L2", "L3"].iter().enumerate().rev() {
            for _ in 0..e[i] {
                t = b.get(name).unwrap().compose(&t).unwrap();
            }
        }
        naive = naive.add(&t).unwrap();
    }
    assert_eq!(evaluate_abstract(&p, &b).unwrap(), naive);
}

#[test]
fn trivial_relation_is_structural() {
    let cfg = quick_cfg();
    let rel = AbstractIntegralPoly::parse(&A2_CUBIC_GENS, "I - I", &[]).unwrap();
    let (r, residual) =
        verify_relation("trivial", System::A2, &rel, &Binding::a2(Some(A2Pair::I12), None), &cfg).unwrap();
    assert!(residual.is_zero());
    assert!(r.structural_zero);
    assert_eq!(r.status, Status::Pass);
}

#[test]
fn identity_descents() {
    let cfg = quick_cfg();
    let basis = [("L1", catalog::a2_l1()), ("L2", catalog::a2_l2()), ("L3", catalog::a2_l3())];
    let out = express_in_integrals(System::A2, &catalog::a2_l1(), &basis, &cfg).unwrap();
    assert_eq!(out.poly, AbstractIntegralPoly::parse(&["L1", "L2", "L3", "g2", "g3"], "L1", &[]).unwrap());
    let l2 = catalog::a2_l2();
    let out = express_in_integrals(System::A2, &l2.compose(&l2).unwrap(), &basis, &cfg).unwrap();
    assert_eq!(out.poly.render(), "L2^2");
    assert!(!out.used_numerics());
    // L1·L3 needs the addition theorem below the top order.
    let target = catalog::a2_l1().compose(&catalog::a2_l3()).unwrap();
    let out = express_in_integrals(System::A2, &target, &basis, &cfg).unwrap();
    assert_eq!(out.poly.render(), "L1 L3");
}

#[test]
fn descent_rejects_nonconstant_symbol() {
    let cfg = quick_cfg();
    let basis = [("L1", catalog::a2_l1()), ("L2", catalog::a2_l2()), ("L3", catalog::a2_l3())];
    let pot = DiffOp::scalar(3, EllipticPoly::wp(&[1, -1, 0]).unwrap());
    let target = pot.compose(&DiffOp::derivative(3, 0)).unwrap();
    assert!(matches!(
        express_in_integrals(System::A2, &target, &basis, &cfg),
        Err(RelationError::NotExpressible(_))
    ));
}

#[test]
fn sv_remark_reproduces_the_reduced_curve() {
    let out = sv_remark_check(&build_a_coefficients()).unwrap();
    assert!(out.matches_displayed, "{}", out.reduced);
    assert!(out.matches_quoted_after_sign);
    assert!(out.depressed);
    let lm = ["lambda", "mu", "g2", "g3"];
    assert_eq!(out.y_reduced, AbstractIntegralPoly::parse(&lm, "4 lambda^3 + mu^2", &[]).unwrap());
    assert!(out.report.passed());
}

#[test]
fn separation_examples() {
    let [a, b, c] = A2Pair::ALL.map(catalog::a2_i);
    let sym_sum = symbol(&a.add(&b).unwrap().add(&c).unwrap());
    let l4 = symbol(&a.add(&b.scale_rational(&q(2, 1))).unwrap());
    for seed in [1, 2, 3] {
        let s = separation_check(System::A2, &sym_sum, seed);
        assert_eq!((s.distinct_values, s.orbit_size), (1, 6));
        assert!(s.fiber_consistent);
        assert_eq!(separation_check(System::A2, &l4, seed).distinct_values, 6);
        assert_eq!(separation_check(System::A2, &symbol(&catalog::a2_l2()), seed).distinct_values, 1);
    }
    let s = separation_check(System::B2, &symbol(&catalog::b2_l3()), 5);
    assert_eq!((s.distinct_values, s.orbit_size), (8, 8));
    assert!(s.fiber_consistent);
    assert_eq!(separation_check(System::B2, &symbol(&catalog::b2_ix()), 5).distinct_values, 4);
}

#[test]
fn independence_examples() {
    for (system, rank) in [(System::A2, 3), (System::B2, 2)] {
        let out = symbol_independence_check(system, 11);
        assert!(out.independent(), "{system}: {:?}", out.ranks);
        assert_eq!(out.expected_rank, rank);
        assert_eq!(out.points.len(), 3);
        let zero = vec![Rational::zero(); system.n_vars()];
        assert!(jacobian_rank(system, &zero) < rank);
    }
}

fn small_poly() -> impl Strategy<Value = AbstractIntegralPoly> {
    prop::collection::vec(((0u32..3, 0u32..3, 0u32..2, 0u32..2, 0u32..2), -5i64..6), 0..5).prop_map(|ts| {
        AbstractIntegralPoly::from_terms(
            &A2_BASE,
            ts.into_iter().map(|((a, b, c, d, e), k)| (vec![a, b, c, d, e], Rational::from_int(k))),
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn ring_laws(p in small_poly(), r in small_poly(), s in small_poly()) {
        prop_assert_eq!(p.add(&r).unwrap().mul(&s).unwrap(), p.mul(&s).unwrap().add(&r.mul(&s).unwrap()).unwrap());
        prop_assert_eq!(p.mul(&r).unwrap(), r.mul(&p).unwrap());
        prop_assert!(p.sub(&p).unwrap().is_zero());
        let t = p.to_canonical_text();
        prop_assert_eq!(AbstractIntegralPoly::parse_canonical_text(&t).unwrap(), p.clone());
        let wide = p.with_generators(&A2_CUBIC_GENS).unwrap();
        prop_assert_eq!(wide.with_generators(&A2_BASE).unwrap(), p);
    }

    #[test]
    fn evaluation_is_additive(p in small_poly(), r in small_poly()) {
        let b = Binding::a2(None, None);
        let lhs = evaluate_abstract(&p.add(&r).unwrap(), &b).unwrap();
        let rhs = evaluate_abstract(&p, &b).unwrap().add(&evaluate_abstract(&r, &b).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
