use super::*;
use crate::diffop::MultiIndex;
use crate::elliptic::{canonicalize_argument, reduce_symmetric, EPoly};
use crate::scalars::DEFAULT_PRECISION_BITS;

const P: usize = DEFAULT_PRECISION_BITS;

fn ctx(g2: (i64, i64), g3: (i64, i64)) -> EllipticContext {
    EllipticContext::new(Rational::new(g2.0, g2.1), Rational::new(g3.0, g3.1), P).unwrap()
}

fn z(re: f64, im: f64) -> BigComplex {
    BigComplex::from_f64(re, im, P)
}

fn rel_err(a: &BigComplex, b: &BigComplex) -> f64 {
    (a - b).abs_f64() / b.abs_f64().max(1e-300)
}

/// Coefficients from matching powers in ℘″ = 6℘² − g2/2:
/// c_k ((2k−2)(2k−3) − 12) = 6 Σ_{m+n=k} c_m c_n.
fn oracle_coefficients(g2: &Rational, g3: &Rational, last: usize) -> Vec<Rational> {
    let mut c = vec![Rational::zero(), Rational::zero(), g2 * &Rational::new(1, 20), g3 * &Rational::new(1, 28)];
    for k in 4..=last {
        let mut s = Rational::zero();
        for m in 2..=(k - 2) {
            s += &c[m] * &c[k - m];
        }
        let kk = k as i64;
        c.push(s * Rational::new(6, (2 * kk - 2) * (2 * kk - 3) - 12));
    }
    c
}

#[test]
fn laurent_recurrence_matches_ode_oracle() {
    let (g2, g3) = (Rational::new(7, 3), Rational::new(5, 7));
    let ours = laurent_coefficients(&g2, &g3, 20);
    let oracle = oracle_coefficients(&g2, &g3, 20);
    for k in 2..=20 {
        assert_eq!(ours[k - 2], oracle[k]);
    }
}

#[test]
fn lemniscatic_value_at_one_tenth() {
    // Exact partial sum at z = 1/10, g2 = 4, g3 = 0: 100 + 1/500 + 1/75·10⁻⁶ + …
    let c = oracle_coefficients(&Rational::from_int(4), &Rational::zero(), 40);
    let w = Rational::new(1, 100);
    let mut exact = Rational::from_int(100);
    for (k, ck) in c.iter().enumerate().skip(2) {
        exact += ck * &w.pow(k as u32 - 1);
    }
    let v = ctx((4, 1), (0, 1)).wp(&BigComplex::from_rational(&Rational::new(1, 10), P)).unwrap();
    let want = BigComplex::from_rational(&exact, P);
    assert!(rel_err(&v, &want) < 1e-70);
    assert!((v.to_f64_pair().0 - 100.0020000133).abs() < 1e-9);
}

#[test]
fn ode_residual_is_tiny() {
    let mut rng = crate::random::rng(2024);
    let ctxs = EllipticContext::default_contexts(P).unwrap();
    for i in 0..20 {
        let c = &ctxs[i % 3];
        let r = rng.gen_range(0.01..0.25);
        let t = rng.gen_range(0.0..(2.0 * PI));
        let ratio = c.ode_residual_ratio(&z(r * t.cos(), r * t.sin())).unwrap();
        assert!(ratio < c.threshold(), "ratio {ratio}");
    }
}

#[test]
fn ode_residual_at_low_precision() {
    let c = EllipticContext::new(Rational::new(7, 3), Rational::new(5, 7), 64).unwrap();
    let ratio = c.ode_residual_ratio(&BigComplex::from_f64(0.07, -0.11, 64)).unwrap();
    assert!(ratio < c.threshold());
}

#[test]
fn parity() {
    let c = ctx((7, 3), (5, 7));
    let a = z(0.05, 0.08);
    let (w, wp) = c.wp_pair(&a).unwrap();
    let (wn, wpn) = c.wp_pair(&-&a).unwrap();
    assert!(rel_err(&wn, &w) < 1e-70);
    assert!(rel_err(&wpn, &-&wp) < 1e-70);
}

#[test]
fn central_difference_matches_derivative() {
    let c = ctx((0, 1), (4, 1));
    let h = BigComplex::from_f64(1e-20, 0.0, P);
    let two_h = h.scale(&Rational::from_int(2));
    let mut rng = crate::random::rng(99);
    for _ in 0..10 {
        let t = rng.gen_range(0.0..(2.0 * PI));
        let r = rng.gen_range(0.02..0.2);
        let x = z(r * t.cos(), r * t.sin());
        let (w, wp) = c.wp_pair(&x).unwrap();
        let fd = (&c.wp(&(&x + &h)).unwrap() - &c.wp(&(&x - &h)).unwrap()).checked_div(&two_h).unwrap();
        // error ≈ h²/6 · |℘‴| with ℘‴ = 12 ℘ ℘′
        let bound = 1e-40 / 6.0 * 12.0 * w.abs_f64() * wp.abs_f64() * 10.0;
        assert!((&fd - &wp).abs_f64() < bound);
    }
}

#[test]
fn zero_argument_and_divergence() {
    let c = ctx((4, 1), (0, 1));
    assert_eq!(c.wp(&z(0.0, 0.0)), Err(NumericError::ZeroArgument));
    // Beyond the lattice radius (≈ 2.6 for this curve) the series diverges.
    assert!(matches!(c.wp(&z(4.0, 0.0)), Err(NumericError::NonConvergent(_))));
}

#[test]
fn degenerate_and_low_precision_contexts_are_rejected() {
    assert!(matches!(
        EllipticContext::new(Rational::from_int(3), Rational::from_int(1), P),
        Err(NumericError::DegenerateCurve(..))
    ));
    assert!(matches!(
        EllipticContext::new(Rational::from_int(4), Rational::zero(), 32),
        Err(NumericError::PrecisionTooLow(32))
    ));
}

#[test]
fn e_roots() {
    let r = ctx((4, 1), (0, 1)).solve_e_roots().unwrap();
    let want = [-1.0, 0.0, 1.0];
    for (x, w) in r.iter().zip(want) {
        assert!((x - &z(w, 0.0)).abs_f64() < 1e-70);
    }
    for c in EllipticContext::default_contexts(P).unwrap() {
        let [a, b, d] = c.solve_e_roots().unwrap();
        let sum = &(&a + &b) + &d;
        assert!(sum.abs_f64() < 1e-70);
        let prod = &(&a * &b) * &d;
        let g3q = BigComplex::from_rational(&(c.g3() * &Rational::new(1, 4)), P);
        assert!((&prod - &g3q).abs_f64() < 1e-70);
        let s2 = &(&(&a * &b) + &(&a * &d)) + &(&b * &d);
        let g2q = BigComplex::from_rational(&(c.g2() * &Rational::new(-1, 4)), P);
        assert!((&s2 - &g2q).abs_f64() < 1e-70);
    }
}

#[test]
fn symmetric_reduction_agrees_with_numeric_roots() {
    let mut rng = crate::random::rng(5);
    for c in EllipticContext::default_contexts(P).unwrap() {
        let roots = c.solve_e_roots().unwrap();
        let g2 = BigComplex::from_rational(c.g2(), P);
        let g3 = BigComplex::from_rational(c.g3(), P);
        for _ in 0..4 {
            let mut base = EPoly::zero();
            for _ in 0..3 {
                let key = [rng.gen_range(0..3), rng.gen_range(0..3), rng.gen_range(0..2), rng.gen_range(0..2), 0];
                base = base.add(&EPoly::from_terms([(key, Rational::new(rng.gen_range(-5..=5), 3))]));
            }
            let perms = [[0, 1, 2], [1, 2, 0], [2, 0, 1], [1, 0, 2], [0, 2, 1], [2, 1, 0]];
            let sym = perms.iter().fold(EPoly::zero(), |acc, p| acc.add(&base.permute_roots(*p)));
            let reduced = reduce_symmetric(&sym).unwrap();
            let lhs = sym.eval(&roots, &g2, &g3);
            let rhs = reduced.eval_complex(&g2, &g3);
            assert!((&lhs - &rhs).abs_f64() <= 1e-60 * (1.0 + rhs.abs_f64()));
        }
    }
}

#[test]
fn sample_points_are_valid_and_reproducible() {
    let c = ctx((7, 3), (5, 7));
    let a = c.sample_points(3, 8, 42).unwrap();
    let b = c.sample_points(3, 8, 42).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 8);
    for pt in &a {
        for coeffs in argument_pool(3) {
            let m = pt.eval_linear(&coeffs).abs_f64();
            assert!((0.01..=0.25).contains(&m), "argument modulus {m}");
        }
        for x in &pt.coords {
            let m = x.abs_f64();
            assert!((0.02 - 1e-12..=0.06 + 1e-12).contains(&m));
        }
    }
    assert_ne!(a, c.sample_points(3, 8, 43).unwrap());
}

#[test]
fn eval_examples() {
    let c = ctx((7, 3), (5, 7));
    let pt = &c.sample_points(3, 1, 1).unwrap()[0];
    let (u, _) = canonicalize_argument(&[1, -1, 0]).unwrap();
    let ode = EllipticPoly::wp_prime_arg(u)
        .mul(&EllipticPoly::wp_prime_arg(u))
        .sub(&EllipticPoly::weierstrass_cubic(u));
    // Normal form collapses the ODE to zero structurally; evaluate the raw form instead.
    assert!(ode.is_zero());
    let (v, w) = eval_elliptic_poly(&c, &ode, pt).unwrap();
    assert!(v.is_zero() && w == 0.0);

    let p12 = EllipticPoly::wp(&[1, -1, 0]).unwrap();
    let (v, w) = eval_elliptic_poly(&c, &p12, pt).unwrap();
    let direct = c.wp(&(&pt.coords[0] - &pt.coords[1])).unwrap();
    assert!(rel_err(&v, &direct) < 1e-70);
    assert!((w - direct.abs_f64()).abs() <= 1e-12 * w);

    // ℘′³ in normal form equals the cube of the evaluated ℘′.
    let cube = EllipticPoly::wp_prime(&[1, -1, 0]).unwrap().pow(3);
    let (v, w) = eval_elliptic_poly(&c, &cube, pt).unwrap();
    let direct = c.wp_prime(&(&pt.coords[0] - &pt.coords[1])).unwrap().powi(3);
    assert!((&v - &direct).abs_f64() <= w * c.threshold());
}

#[test]
fn ode_cancellation_has_a_witness() {
    // ℘(u)³ − ℘(u)·℘(u)² is structurally zero, so build the cancellation from
    // distinct arguments that coincide numerically: ℘(x1) − ℘(x1) via two points.
    let c = ctx((4, 1), (0, 1));
    let pt = SamplePoint::new(vec![z(0.03, 0.01), z(0.03, 0.01)]);
    let p = EllipticPoly::wp(&[1, 0]).unwrap().sub(&EllipticPoly::wp(&[0, 1]).unwrap());
    let (v, w) = eval_elliptic_poly(&c, &p, &pt).unwrap();
    assert!(v.is_zero());
    assert!(w > 1000.0);
}

#[test]
fn oracle_structural_zero_and_mutation() {
    let ctxs = EllipticContext::default_contexts(P).unwrap();
    let out = vanishing_oracle(&ctxs, &DiffOp::zero(3), 3, 1);
    assert_eq!(out.status, Status::Pass);
    assert!(out.structural_zero);
    assert_eq!(out.max_ratio, 0.0);

    let bad = DiffOp::term(3, MultiIndex::new(&[1, 0, 0]), EllipticPoly::wp(&[1, -1, 0]).unwrap());
    let out = vanishing_oracle(&ctxs, &bad, 3, 1);
    assert_eq!(out.status, Status::Fail);
    assert!((out.max_ratio - 1.0).abs() < 1e-12);
    assert_eq!(out.details[0].coefficient_multiindex, vec![1, 0, 0]);
}

#[test]
fn oracle_is_deterministic_across_thread_counts() {
    let ctxs = EllipticContext::default_contexts(P).unwrap();
    let op = crate::random::random_diffop(&mut crate::random::rng(8), 3, 2, 5);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| vanishing_oracle(&ctxs, &op, 4, 17))
    };
    assert_eq!(run(1), run(4));
}

