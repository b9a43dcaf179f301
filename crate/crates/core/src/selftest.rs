//! Randomized invariant suites for the engine, run by `cmspec selftest`.

use serde::Serialize;

use crate::diffop::{DiffOp, DiffOpError};
use crate::elliptic::EllipticPoly;
use crate::numeric::{vanishing_oracle, EllipticContext};
use crate::random;
use crate::scalars::{BigComplex, Rational};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub property: &'static str,
    pub cases: usize,
    pub passed: bool,
    pub detail: Option<String>,
}

fn result(suite: &'static str, property: &'static str, cases: usize, failure: Option<String>) -> SuiteResult {
    SuiteResult { suite, property, cases, passed: failure.is_none(), detail: failure }
}

fn first_failure(cases: usize, mut check: impl FnMut(usize) -> Result<(), String>) -> Option<String> {
    (0..cases).find_map(|i| check(i).err().map(|e| format!("case {i}: {e}")))
}

fn scalars(seed: u64, prec: usize) -> Vec<SuiteResult> {
    let mut rng = random::rng(seed);
    let field = first_failure(50, |_| {
        let (a, b, c) =
            (random::random_rational(&mut rng), random::random_rational(&mut rng), random::random_rational(&mut rng));
        let ok = &(&a + &b) * &c == &(&a * &c) + &(&b * &c)
            && &a * &a.recip().map_err(|e| e.to_string())? == Rational::one()
            && &(&a - &b) + &b == a;
        ok.then_some(()).ok_or_else(|| format!("{a} {b} {c}"))
    });
    let mut rng = random::rng(seed ^ 1);
    let complex = first_failure(20, |_| {
        let z = BigComplex::from_rationals(&random::random_rational(&mut rng), &random::random_rational(&mut rng), prec);
        let w = BigComplex::from_rationals(&random::random_rational(&mut rng), &Rational::one(), prec);
        let back = &z.checked_div(&w).map_err(|e| e.to_string())? * &w;
        let err = (&back - &z).abs_f64() / z.abs_f64().max(1.0);
        (err < 2f64.powi(-(prec as i32) + 8)).then_some(()).ok_or_else(|| format!("relative error {err:e}"))
    });
    vec![
        result("scalars", "rational field laws", 50, field),
        result("scalars", "complex division round trip", 20, complex),
    ]
}

fn elliptic(seed: u64) -> Vec<SuiteResult> {
    let mut rng = random::rng(seed);
    let idempotent = first_failure(30, |_| {
        let raw = random::random_raw_terms(&mut rng, 3, 4, 3);
        let p = EllipticPoly::from_terms(raw);
        let again = EllipticPoly::from_terms(p.terms().iter().cloned());
        (again == p && p.terms().iter().all(|(m, _)| m.is_normal()))
            .then_some(())
            .ok_or_else(|| format!("{p:?}"))
    });
    let mut rng = random::rng(seed ^ 2);
    let mixed = first_failure(30, |_| {
        let p = random::random_poly(&mut rng, 3, 3);
        let a = p.differentiate(0).differentiate(1);
        let b = p.differentiate(1).differentiate(0);
        (a == b).then_some(()).ok_or_else(|| format!("{p:?}"))
    });
    let mut rng = random::rng(seed ^ 3);
    let leibniz = first_failure(30, |_| {
        let f = random::random_poly(&mut rng, 2, 2);
        let g = random::random_poly(&mut rng, 2, 2);
        let lhs = f.mul(&g).differentiate(0);
        let rhs = f.differentiate(0).mul(&g).add(&f.mul(&g.differentiate(0)));
        (lhs == rhs).then_some(()).ok_or_else(|| format!("{f:?} {g:?}"))
    });
    vec![
        result("elliptic_ring", "normal form idempotence", 30, idempotent),
        result("elliptic_ring", "mixed partials commute", 30, mixed),
        result("elliptic_ring", "Leibniz rule for derivatives", 30, leibniz),
    ]
}

fn diffops(seed: u64) -> Result<Vec<SuiteResult>, DiffOpError> {
    let mut rng = random::rng(seed);
    let mut triples = Vec::new();
    for _ in 0..12 {
        triples.push((
            random::random_diffop(&mut rng, 2, 2, 2),
            random::random_diffop(&mut rng, 2, 2, 2),
            random::random_diffop(&mut rng, 2, 2, 2),
        ));
    }
    let check = |f: &dyn Fn(&DiffOp, &DiffOp, &DiffOp) -> Result<bool, DiffOpError>| -> Result<Option<String>, DiffOpError> {
        for (i, (a, b, c)) in triples.iter().enumerate() {
            if !f(a, b, c)? {
                return Ok(Some(format!("case {i}")));
            }
        }
        Ok(None)
    };
    let assoc = check(&|a, b, c| Ok(a.compose(&b.compose(c)?)? == a.compose(b)?.compose(c)?))?;
    let jacobi = check(&|a, b, c| {
        let t1 = a.commutator(&b.commutator(c)?)?;
        let t2 = b.commutator(&c.commutator(a)?)?;
        let t3 = c.commutator(&a.commutator(b)?)?;
        Ok(t1.add(&t2)?.add(&t3)?.is_zero())
    })?;
    let derivation = check(&|a, b, c| {
        let lhs = a.commutator(&b.compose(c)?)?;
        let rhs = a.commutator(b)?.compose(c)?.add(&b.compose(&a.commutator(c)?)?)?;
        Ok(lhs == rhs)
    })?;
    Ok(vec![
        result("diff_op", "composition is associative", triples.len(), assoc),
        result("diff_op", "Jacobi identity", triples.len(), jacobi),
        result("diff_op", "commutator is a derivation", triples.len(), derivation),
    ])
}

fn numerics(contexts: &[EllipticContext], seed: u64) -> Vec<SuiteResult> {
    let mut rng = random::rng(seed);
    let mut ode = None;
    let mut parity = None;
    let mut cases = 0;
    for ctx in contexts {
        let pts = match ctx.sample_points(1, 7, rand::Rng::gen(&mut rng)) {
            Ok(p) => p,
            Err(e) => {
                ode = Some(e.to_string());
                break;
            }
        };
        for pt in pts {
            cases += 1;
            let z = &pt.coords[0];
            match ctx.ode_residual_ratio(z) {
                Ok(r) if r < ctx.threshold() => {}
                Ok(r) => ode = ode.or(Some(format!("({}, {}) ratio {r:e}", ctx.g2(), ctx.g3()))),
                Err(e) => ode = ode.or(Some(e.to_string())),
            }
            let (Ok((p, dp)), Ok((pm, dpm))) = (ctx.wp_pair(z), ctx.wp_pair(&-z)) else {
                parity = parity.or(Some("series did not converge".to_string()));
                continue;
            };
            let tol = 2f64.powi(-(ctx.precision_bits() as i32) + 16);
            let even = (&p - &pm).abs_f64() <= tol * p.abs_f64();
            let odd = (&dp + &dpm).abs_f64() <= tol * dp.abs_f64();
            if !(even && odd) {
                parity = parity.or(Some(format!("({}, {})", ctx.g2(), ctx.g3())));
            }
        }
    }
    // The same oracle run under one thread and under the default pool.
    let op = crate::catalog::a2_l1().commutator(&crate::catalog::a2_l3()).expect("same variables");
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map(|pool| pool.install(|| vanishing_oracle(contexts, &op, 3, seed)))
            .map_err(|e| e.to_string())
    };
    let determinism = match (run(1), run(4)) {
        (Ok(a), Ok(b)) if a == b => None,
        (Ok(_), Ok(_)) => Some("outcomes differ between 1 and 4 threads".into()),
        (Err(e), _) | (_, Err(e)) => Some(e),
    };
    vec![
        result("numeric_eval", "ODE residual below threshold", cases, ode),
        result("numeric_eval", "parity of wp and wp'", cases, parity),
        result("numeric_eval", "oracle deterministic across thread counts", 2, determinism),
    ]
}

/// Runs every suite; contexts supply the curves and precision for the
/// numeric suite.
pub fn run(contexts: &[EllipticContext], seed: u64) -> Vec<SuiteResult> {
    let prec = contexts.iter().map(|c| c.precision_bits()).min().unwrap_or(crate::scalars::DEFAULT_PRECISION_BITS);
    let mut out = scalars(seed, prec);
    out.extend(elliptic(seed));
    match diffops(seed) {
        Ok(r) => out.extend(r),
        Err(e) => out.push(result("diff_op", "operator algebra", 0, Some(e.to_string()))),
    }
    out.extend(numerics(contexts, seed));
    out
}
