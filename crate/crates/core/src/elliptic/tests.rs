use proptest::prelude::*;

use super::*;
use crate::random;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn wp(raw: &[i64]) -> EllipticPoly {
    EllipticPoly::wp(raw).unwrap()
}

fn wpp(raw: &[i64]) -> EllipticPoly {
    EllipticPoly::wp_prime(raw).unwrap()
}

fn c(r: i64) -> EllipticPoly {
    EllipticPoly::constant(Rational::from_int(r))
}

#[test]
fn canonicalize_flips_sign() {
    let (arg, parity) = canonicalize_argument(&[-1, 1, 0]).unwrap();
    assert_eq!(arg.to_vec(), vec![1, -1, 0]);
    assert_eq!(parity, -1);
    let (arg, parity) = canonicalize_argument(&[1, -1, 0]).unwrap();
    assert_eq!(arg.to_vec(), vec![1, -1, 0]);
    assert_eq!(parity, 1);
    assert_eq!(canonicalize_argument(&[0, 0]), Err(EllipticError::ZeroArgument));
    assert_eq!(canonicalize_argument(&[0, -2]).unwrap().0.to_vec(), vec![0, 2]);
    assert!(canonicalize_argument(&[1, 0, 0, 0, 1]).is_err());
}

#[test]
fn add_examples() {
    let p12 = wp(&[1, -1, 0]);
    assert!(p12.add(&p12.neg()).is_zero());
    let two = p12.add(&wp(&[0, 1, -1]));
    assert_eq!(two.len(), 2);
    let g2p = EllipticPoly::g2().mul(&p12);
    let sum = g2p.add(&g2p.scale(&q(3, 1)));
    assert_eq!(sum, g2p.scale(&q(4, 1)));
    assert_eq!(sum.terms()[0].1, q(4, 1));
}

#[test]
fn wp_prime_squared_reduces() {
    let u = [1i64, -1, 0];
    let sq = wpp(&u).mul(&wpp(&u));
    let expected = wp(&u)
        .pow(3)
        .scale(&q(4, 1))
        .sub(&EllipticPoly::g2().mul(&wp(&u)))
        .sub(&EllipticPoly::g3());
    assert_eq!(sq, expected);
}

#[test]
fn distinct_primes_do_not_reduce() {
    let prod = wpp(&[1, -1, 0]).mul(&wpp(&[0, 1, -1]));
    assert_eq!(prod.len(), 1);
    let m = &prod.terms()[0].0;
    assert_eq!(m.factors().len(), 2);
    assert!(m.factors().iter().all(|f| f.pp == 1 && f.p == 0));
}

#[test]
fn cube_of_wp_prime() {
    let u = [1i64, 0];
    let cube = wpp(&u).pow(3);
    let (arg, _) = canonicalize_argument(&u).unwrap();
    let expected = wpp(&u).mul(&EllipticPoly::weierstrass_cubic(arg));
    assert_eq!(cube, expected);
    assert!(cube.terms().iter().all(|(m, _)| m.is_normal()));
}

#[test]
fn differentiate_examples() {
    let p12 = wp(&[1, -1, 0]);
    assert_eq!(p12.differentiate(0), wpp(&[1, -1, 0]));
    assert_eq!(p12.differentiate(1), wpp(&[1, -1, 0]).neg());
    assert!(p12.differentiate(2).is_zero());
    let second = wpp(&[1, -1, 0]).differentiate(0);
    let expected = wp(&[1, -1, 0]).pow(2).scale(&q(6, 1)).sub(&EllipticPoly::g2().scale(&q(1, 2)));
    assert_eq!(second, expected);
    assert_eq!(second, EllipticPoly::wp_second(&[1, -1, 0]).unwrap());
}

#[test]
fn differentiate_prime_times_power() {
    // d/dx (℘ ℘′) = ℘′² + ℘ ℘″ = 4℘³ − g2℘ − g3 + 6℘³ − g2℘/2
    let u = [1i64];
    let f = wp(&u).mul(&wpp(&u)).differentiate(0);
    let expected = wp(&u)
        .pow(3)
        .scale(&q(10, 1))
        .sub(&EllipticPoly::g2().mul(&wp(&u)).scale(&q(3, 2)))
        .sub(&EllipticPoly::g3());
    assert_eq!(f, expected);
}

#[test]
fn specialize_examples() {
    let hp = HalfPeriodAssignment::a2();
    let p = wp(&[1, -1, 0]).mul(&wp(&[0, 1, -1]));
    assert_eq!(
        specialize_half_periods(&p, &hp).unwrap(),
        EPoly::e(0).mul(&EPoly::e(1))
    );
    let p = wpp(&[1, 0, -1]).mul(&wp(&[1, -1, 0]));
    assert!(specialize_half_periods(&p, &hp).unwrap().is_zero());
    let p = wpp(&[-1, 0, 1]);
    assert!(specialize_half_periods(&p, &hp).unwrap().is_zero());

    let hp = HalfPeriodAssignment::b2();
    let p = EllipticPoly::g2().mul(&wp(&[1, 1]).pow(2));
    assert_eq!(
        specialize_half_periods(&p, &hp).unwrap(),
        EPoly::g2().mul(&EPoly::e(2).pow(2))
    );
    let uncovered = wp(&[1, 2]);
    assert!(matches!(
        specialize_half_periods(&uncovered, &hp),
        Err(EllipticError::UncoveredArgument(_))
    ));
}

#[test]
fn reduce_symmetric_examples() {
    let s1 = EPoly::e(0).add(&EPoly::e(1)).add(&EPoly::e(2));
    assert!(reduce_symmetric(&s1).unwrap().is_zero());
    let p2 = EPoly::e(0).pow(2).add(&EPoly::e(1).pow(2)).add(&EPoly::e(2).pow(2));
    assert_eq!(reduce_symmetric(&p2).unwrap(), GPoly::monomial(1, 0, q(1, 2)));
    assert!(matches!(
        reduce_symmetric(&EPoly::e(0)),
        Err(EllipticError::NotSymmetric(_))
    ));
    let s3 = EPoly::e(0).mul(&EPoly::e(1)).mul(&EPoly::e(2));
    assert_eq!(reduce_symmetric(&s3).unwrap(), GPoly::monomial(0, 1, q(1, 4)));
    // g2 + 4σ2 vanishes on the root variety even though it mixes g2 and roots.
    let s2 = EPoly::e(0)
        .mul(&EPoly::e(1))
        .add(&EPoly::e(0).mul(&EPoly::e(2)))
        .add(&EPoly::e(1).mul(&EPoly::e(2)));
    let vanishing = EPoly::g2().add(&s2.scale(&q(4, 1))).mul(&EPoly::e(0));
    assert!(reduce_symmetric(&vanishing).unwrap().is_zero());
}

#[test]
fn reduce_symmetric_on_plane_only_symmetric() {
    // e1² + e1e2 + e2² equals −σ2 on the plane e3 = −e1 − e2; it is not
    // symmetric as a polynomial in three variables.
    let p = EPoly::e(0)
        .pow(2)
        .add(&EPoly::e(0).mul(&EPoly::e(1)))
        .add(&EPoly::e(1).pow(2));
    assert_eq!(reduce_symmetric(&p).unwrap(), GPoly::monomial(1, 0, q(1, 4)));
}

#[test]
fn weighted_degree_examples() {
    let u = [1i64, 0];
    let v = [0i64, 1];
    assert_eq!(EllipticPoly::g2().mul(&wp(&u)).weighted_degree(), WeightedDegree::Homogeneous(6));
    assert_eq!(wpp(&u).mul(&wp(&v)).weighted_degree(), WeightedDegree::Homogeneous(5));
    let inh = wp(&u).add(&EllipticPoly::g2()).weighted_degree();
    assert!(!inh.is_homogeneous());
    assert_eq!(
        EPoly::g3().add(&EPoly::e(0).pow(3)).weighted_degree(),
        WeightedDegree::Homogeneous(6)
    );
}

#[test]
fn parity_is_structural() {
    assert_eq!(wpp(&[-1, 1, 0]), wpp(&[1, -1, 0]).neg());
    assert_eq!(wp(&[-1, 1, 0]), wp(&[1, -1, 0]));
}

#[test]
fn canonical_text_round_trip() {
    let mut rng = random::rng(11);
    for _ in 0..20 {
        let p = random::random_poly(&mut rng, 3, 6);
        let text = p.to_canonical_text();
        assert_eq!(EllipticPoly::parse_canonical_text(&text).unwrap(), p);
    }
    let p = wpp(&[1, -1, 0]).mul(&EllipticPoly::g2()).add(&c(3));
    assert_eq!(p.to_canonical_text(), "1 : 3/1\ng2^1 Pp[1,-1,0]^1 : 1/1\n");
    assert!(EllipticPoly::parse_canonical_text("P[-1,1]^1 : 1/1").is_err());
}

fn seeds() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_is_idempotent(seed in seeds()) {
        let mut rng = random::rng(seed);
        let raw = random::random_raw_terms(&mut rng, 3, 5, 4);
        let once = EllipticPoly::from_terms(raw);
        prop_assert!(once.terms().iter().all(|(m, _)| m.is_normal()));
        let twice = EllipticPoly::from_terms(once.terms().to_vec());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn differentiation_is_a_derivation(seed in seeds()) {
        let mut rng = random::rng(seed);
        let p = random::random_poly(&mut rng, 3, 4);
        let r = random::random_poly(&mut rng, 3, 4);
        for v in 0..3 {
            let lhs = p.mul(&r).differentiate(v);
            let rhs = p.differentiate(v).mul(&r).add(&p.mul(&r.differentiate(v)));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn mixed_partials_commute(seed in seeds()) {
        let mut rng = random::rng(seed);
        let p = random::random_poly(&mut rng, 3, 5);
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(p.differentiate(i).differentiate(j), p.differentiate(j).differentiate(i));
            }
        }
    }

    #[test]
    fn differentiation_raises_weight_by_one(seed in seeds()) {
        let mut rng = random::rng(seed);
        let m = random::random_monomial(&mut rng, 2, 2, 1);
        let p = EllipticPoly::monomial(m, Rational::one());
        if let WeightedDegree::Homogeneous(w) = p.weighted_degree() {
            for v in 0..2 {
                match p.differentiate(v).weighted_degree() {
                    WeightedDegree::Zero => {}
                    d => prop_assert_eq!(d, WeightedDegree::Homogeneous(w + 1)),
                }
            }
        }
    }

    #[test]
    fn multiplication_commutes_and_associates(seed in seeds()) {
        let mut rng = random::rng(seed);
        let a = random::random_poly(&mut rng, 2, 3);
        let b = random::random_poly(&mut rng, 2, 3);
        let d = random::random_poly(&mut rng, 2, 3);
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&d), a.mul(&b.mul(&d)));
    }
}
