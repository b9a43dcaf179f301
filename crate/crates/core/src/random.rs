//! Seeded generators of random symbolic objects for the invariant suites.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::diffop::{DiffOp, MultiIndex};
use crate::elliptic::{canonicalize_argument, EllipticMonomial, EllipticPoly, Factor};
use crate::scalars::Rational;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Root-system style linear forms in `n` variables: singles, differences, sums.
pub fn argument_pool(n: usize) -> Vec<Vec<i64>> {
    let mut pool = Vec::new();
    for i in 0..n {
        let mut v = vec![0; n];
        v[i] = 1;
        pool.push(v);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut d = vec![0; n];
            d[i] = 1;
            d[j] = -1;
            pool.push(d);
            let mut s = vec![0; n];
            s[i] = 1;
            s[j] = 1;
            pool.push(s);
        }
    }
    pool
}

pub fn random_rational(rng: &mut impl Rng) -> Rational {
    let n = rng.gen_range(-9i64..=9);
    let d = rng.gen_range(1i64..=4);
    let r = Rational::new(n, d);
    if r.is_zero() {
        Rational::one()
    } else {
        r
    }
}

/// Random monomial; `max_pp` above one produces non-normal input.
pub fn random_monomial(rng: &mut impl Rng, n: usize, max_factors: usize, max_pp: u8) -> EllipticMonomial {
    let pool = argument_pool(n);
    let k = rng.gen_range(0..=max_factors);
    let mut factors = Vec::new();
    for raw in pool.choose_multiple(rng, k.min(pool.len())) {
        let (arg, _) = canonicalize_argument(raw).expect("pool arguments are nonzero");
        factors.push(Factor { arg, p: rng.gen_range(0..=2), pp: rng.gen_range(0..=max_pp) });
    }
    EllipticMonomial::raw(factors, rng.gen_range(0..=1), rng.gen_range(0..=1))
}

/// Random terms, possibly outside normal form, and their normalization.
pub fn random_raw_terms(
    rng: &mut impl Rng,
    n: usize,
    terms: usize,
    max_pp: u8,
) -> Vec<(EllipticMonomial, Rational)> {
    (0..terms)
        .map(|_| (random_monomial(rng, n, 2, max_pp), random_rational(rng)))
        .collect()
}

pub fn random_poly(rng: &mut impl Rng, n: usize, terms: usize) -> EllipticPoly {
    EllipticPoly::from_terms(random_raw_terms(rng, n, terms, 1))
}

/// Random operator of order at most `max_order` with small random coefficients.
pub fn random_diffop(rng: &mut impl Rng, n: usize, max_order: u32, terms: usize) -> DiffOp {
    let mut op = DiffOp::zero(n);
    for _ in 0..terms {
        let mut orders = vec![0u8; n];
        let total = rng.gen_range(0..=max_order);
        for _ in 0..total {
            orders[rng.gen_range(0..n)] += 1;
        }
        let k = rng.gen_range(1..=2);
        let coeff = random_poly(rng, n, k);
        op = op
            .add(&DiffOp::term(n, MultiIndex::new(&orders), coeff))
            .expect("same variable count");
    }
    op
}
