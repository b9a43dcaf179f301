//! Acceptance criteria, one test each. Every test writes a single PASS/FAIL
//! line to stderr, outside the test harness capture.

use std::io::Write;
use std::sync::OnceLock;

use cmspec::catalog::{A2Pair, System};
use cmspec::numeric::{EllipticContext, Status};
use cmspec::pipeline::{separation_candidates, Derivation, Session, Target};
use cmspec::relations::{
    a2_cubic_relation, a2_pair_relation, b2_quartic_relation, b2_sum_relation, build_a_coefficients,
    build_b_coefficients, separation_check, sv_remark_check, symbol_independence_check, verify_commutators,
    verify_relation, weighted_degree, AbstractIntegralPoly, Binding, CheckConfig, VerificationReport, A2_BASE,
};
use cmspec::grading::WeightedDegree;
use cmspec::scalars::Rational;
use cmspec::selftest;

const PRECISION_BITS: usize = 256;

fn cfg() -> CheckConfig {
    CheckConfig::new(EllipticContext::default_contexts(PRECISION_BITS).unwrap(), 8, 42)
}

fn threshold() -> f64 {
    2f64.powi(-(PRECISION_BITS as i32) / 2)
}

fn verdict(n: u32, title: &str, ok: bool, detail: &str) {
    let mark = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n:>2} {mark}: {title} ({detail})");
    assert!(ok, "criterion {n} failed: {title}: {detail}");
}

fn vanishes(r: &VerificationReport) -> bool {
    r.status == Status::Pass && r.max_residual_ratio < threshold()
}

fn derivations(system: System) -> &'static [Derivation] {
    static A: OnceLock<Vec<Derivation>> = OnceLock::new();
    static B: OnceLock<Vec<Derivation>> = OnceLock::new();
    let cell = if system == System::A2 { &A } else { &B };
    cell.get_or_init(|| {
        let mut s = Session::new(cfg(), None);
        Target::ALL.into_iter().filter(|t| t.system() == system).map(|t| s.derive(t).unwrap()).collect()
    })
}

fn derived(t: Target) -> &'static Derivation {
    derivations(t.system()).iter().find(|d| d.target == t).unwrap()
}

#[test]
fn criterion_01_a2_commutators() {
    let reports = verify_commutators(System::A2, &cfg()).unwrap();
    let l1l2 = reports.iter().find(|r| r.subject == "[L1, L2]").unwrap();
    let required = ["L1", "L2", "L3"];
    let relevant: Vec<&VerificationReport> = reports
        .iter()
        .filter(|r| required.iter().any(|l| r.subject.starts_with(&format!("[{l},"))))
        .collect();
    let worst = relevant.iter().map(|r| r.max_residual_ratio).fold(0.0, f64::max);
    let ok = l1l2.structural_zero
        && relevant.len() == 12
        && relevant.iter().all(|r| vanishes(r) && r.trials == 8 && r.contexts.len() == 3);
    verdict(1, "A2 commutators", ok, &format!("{} commutators, worst ratio {worst:.2e}", relevant.len()));
}

#[test]
fn criterion_02_a2_cubic_relation() {
    let rel = a2_cubic_relation(&build_a_coefficients());
    let mut ratios = Vec::new();
    let mut ok = true;
    for pair in A2Pair::ALL {
        let (r, _) = verify_relation("a2-cubic", System::A2, &rel, &Binding::a2(Some(pair), None), &cfg()).unwrap();
        ok &= vanishes(&r);
        ratios.push(format!("{} {:.2e}", pair.name(), r.max_residual_ratio));
    }
    verdict(2, "A2 cubic relation for I12, I23, I31", ok, &ratios.join(", "));
}

#[test]
fn criterion_03_pair_relation() {
    let rel = a2_pair_relation(&build_a_coefficients());
    let binding = Binding::a2(Some(A2Pair::I12), Some(A2Pair::I23));
    let (r, _) = verify_relation("a2-pair", System::A2, &rel, &binding, &cfg()).unwrap();
    verdict(3, "pair relation with I12, I23", vanishes(&r), &format!("ratio {:.2e}", r.max_residual_ratio));
}

#[test]
fn criterion_04_a2_derivation_reproduces_printed_coefficients() {
    let expected = ["6 g2 - X^2", "2 X Y - 15 g2^2 - 2 g2 X^2", "-Y^2 - 2 g2 X Y - 108 g3 Y + 16 g3 X^3 + 15 g2^2 X^2 - 100 g2^3"];
    let a = build_a_coefficients();
    let defs = [("X", &a.x), ("Y", &a.y)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (t, text) in [Target::A1, Target::A2, Target::A3].into_iter().zip(expected) {
        let printed = AbstractIntegralPoly::parse(&A2_BASE, text, &defs).unwrap();
        let d = derived(t);
        ok &= d.poly == printed && d.diff.is_empty();
        detail.push(format!("{t}: {} differing terms", d.diff.len()));
    }
    verdict(4, "A2 derivation reproduces A1, A2, A3", ok, &detail.join(", "));
}

#[test]
fn criterion_05_b2_commutators() {
    let reports = verify_commutators(System::B2, &cfg()).unwrap();
    let subjects: Vec<&str> = reports.iter().map(|r| r.subject.as_str()).collect();
    let all_reported = ["[L, M]", "[L, Ix]", "[L, Iy]", "[M, Ix]", "[M, Iy]", "[Ix, Iy]"]
        .iter()
        .all(|s| subjects.contains(s));
    let required_pass = reports.iter().filter(|r| r.subject.starts_with("[L,")).all(vanishes);
    let statuses: Vec<String> = reports.iter().map(|r| format!("{} {}", r.subject, r.status)).collect();
    verdict(5, "B2 commutators", all_reported && required_pass, &statuses.join(", "));
}

#[test]
fn criterion_06_b2_relations_with_derived_coefficients() {
    let b1 = &derived(Target::B1).poly;
    let b2 = &derived(Target::B2).poly;
    let (q, _) = verify_relation("b2-quartic", System::B2, &b2_quartic_relation(b1, b2), &Binding::b2(), &cfg()).unwrap();
    let (s, _) = verify_relation("b2-sum", System::B2, &b2_sum_relation(b1), &Binding::b2(), &cfg()).unwrap();
    let detail = format!("quartic {:.2e}, sum {:.2e}", q.max_residual_ratio, s.max_residual_ratio);
    verdict(6, "B2 quartic and sum relations", vanishes(&q) && vanishes(&s), &detail);
}

#[test]
fn criterion_07_b2_derivation_against_print() {
    let printed = build_b_coefficients();
    let b1_exact = derived(Target::B1).poly == printed.b1;
    let d = derived(Target::B2);
    let homogeneous = matches!(weighted_degree(System::B2, &d.poly).unwrap(), WeightedDegree::Homogeneous(20));
    // Monomials allowed to differ: the printed weight-26 term and its
    // weight-20 reading with one factor of g3 fewer.
    let suspect = AbstractIntegralPoly::parse(&["L", "M", "g2", "g3"], "g3^3 g2(-65610 L^2 + 118098 M)", &[]).unwrap();
    let mut allowed: Vec<Vec<u32>> = Vec::new();
    for (e, _) in suspect.terms() {
        allowed.push(e.clone());
        let mut lower = e.clone();
        lower[3] -= 1;
        allowed.push(lower);
    }
    let outside: Vec<Vec<u32>> = d
        .poly
        .terms()
        .map(|(e, _)| e.clone())
        .chain(printed.b2.terms().map(|(e, _)| e.clone()))
        .filter(|e| d.poly.coefficient(e) != printed.b2.coefficient(e) && !allowed.contains(e))
        .collect();
    let offenders_are_suspect = printed.b2_offenders.iter().all(|(w, _)| *w == 26);
    let ok = b1_exact && homogeneous && outside.is_empty() && offenders_are_suspect;
    let detail = format!(
        "B1 exact {b1_exact}, B2 weight 20 {homogeneous}, {} differing terms all in the weight-26 term: {}",
        d.diff.len(),
        outside.is_empty()
    );
    verdict(7, "B2 derivation against the printed B1, B2", ok, &detail);
}

#[test]
fn criterion_08_sv_remark() {
    let out = sv_remark_check(&build_a_coefficients()).unwrap();
    let ok = out.matches_displayed && out.matches_quoted_after_sign && out.depressed;
    let detail = format!(
        "displayed {}, quoted after g3 -> -g3 {}, depressed {}",
        out.matches_displayed, out.matches_quoted_after_sign, out.depressed
    );
    verdict(8, "reduced cubic and quoted curve", ok, &detail);
}

#[test]
fn criterion_09_definition_spot_checks() {
    let a = symbol_independence_check(System::A2, 42);
    let b = symbol_independence_check(System::B2, 42);
    let cands = separation_candidates(System::A2).unwrap();
    let counts: Vec<usize> = cands.iter().map(|(_, s, _)| separation_check(System::A2, s, 42).distinct_values).collect();
    let ok = a.independent() && b.independent() && counts == [1, 6];
    let detail = format!("ranks A2 {:?}, B2 {:?}; distinct values sum {}, I12 + 2 I23 {}", a.ranks, b.ranks, counts[0], counts[1]);
    verdict(9, "symbol independence and fiber separation", ok, &detail);
}

/// Adds one to the coefficient of `monomial` in `p`.
fn bump(p: &AbstractIntegralPoly, monomial: &AbstractIntegralPoly) -> AbstractIntegralPoly {
    p.add(monomial).unwrap()
}

#[test]
fn criterion_10_mutation_sensitivity() {
    // (mutation, status, ratio)
    let mut outcomes: Vec<(String, Status, f64)> = Vec::new();

    // A1 = 6 g2 - X^2: the printed coefficients multiply g2 and X^2.
    let a = build_a_coefficients();
    let g2 = AbstractIntegralPoly::generator(&A2_BASE, "g2").unwrap();
    let x2 = a.x.mul(&a.x).unwrap();
    for (label, m) in [("A1 + g2", &g2), ("A1 + X^2", &x2)] {
        let mut mutated = a.clone();
        mutated.a1 = bump(&a.a1, m);
        let rel = a2_cubic_relation(&mutated);
        let (r, _) = verify_relation("a2-cubic", System::A2, &rel, &Binding::a2(Some(A2Pair::I12), None), &cfg()).unwrap();
        outcomes.push((label.to_string(), r.status, r.max_residual_ratio));
    }

    // Each printed B1 coefficient multiplies a distinct monomial.
    let b = build_b_coefficients();
    assert_eq!(b.b1.len(), 9);
    for (e, _) in b.b1.terms() {
        let unit = AbstractIntegralPoly::from_terms(&["L", "M", "g2", "g3"], [(e.clone(), Rational::one())]).unwrap();
        let rel = b2_sum_relation(&bump(&b.b1, &unit));
        let (r, _) = verify_relation("b2-sum", System::B2, &rel, &Binding::b2(), &cfg()).unwrap();
        outcomes.push((format!("B1 + {}", unit.render()), r.status, r.max_residual_ratio));
    }
    let missed: Vec<String> = outcomes
        .iter()
        .filter(|(_, s, r)| !(*s == Status::Fail && *r > 1e-6))
        .map(|(l, s, r)| format!("{l}: {s} at {r:.1e}"))
        .collect();
    let detected = outcomes.iter().filter(|(_, s, _)| *s == Status::Fail).count();
    let detail = format!(
        "{}/{} above 1e-6, {detected}/{} fail the oracle; below 1e-6: [{}]",
        outcomes.len() - missed.len(),
        outcomes.len(),
        outcomes.len(),
        missed.join("; ")
    );
    verdict(10, "perturbed A1 and B1 coefficients are detected", missed.is_empty(), &detail);
}

#[test]
fn criterion_11_engine_property_suites() {
    let results = selftest::run(&EllipticContext::default_contexts(PRECISION_BITS).unwrap(), 42);
    let needed = [
        "composition is associative",
        "Jacobi identity",
        "commutator is a derivation",
        "mixed partials commute",
        "normal form idempotence",
        "ODE residual below threshold",
        "parity of wp and wp'",
        "oracle deterministic across thread counts",
    ];
    let present = needed.iter().all(|n| results.iter().any(|r| r.property == *n));
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.property).collect();
    let detail = format!("{} properties, failing {failed:?}", results.len());
    verdict(11, "engine property suites", present && failed.is_empty(), &detail);
}
