//! Check and derivation runs shared by the command line and the test suites.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::cache::OperatorCache;
use crate::catalog::{self, A2Pair, System};
use crate::diffop::{ConstSymbol, DiffOp};
use crate::grading::WeightedDegree;
use crate::numeric::Status;
use crate::relations::{
    a2_cubic_relation, a2_pair_relation, b2_quartic_relation, b2_sum_relation, basis_symbols, build_a_coefficients,
    build_b_coefficients, derive_elementary_symmetric_with, express_in_integrals, separation_check,
    sv_remark_check, symbol_independence_check, verify_commutators, verify_relation, weighted_degree,
    AbstractIntegralPoly, Binding, CheckConfig, ElementarySymmetric, RelationError, TermDiff, VerificationReport,
};
use crate::scalars::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Commutators,
    A2Cubic,
    A2Pair,
    B2Quartic,
    B2Sum,
    SvRemark,
    Separation,
    Independence,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Commutators,
        Check::A2Cubic,
        Check::A2Pair,
        Check::B2Quartic,
        Check::B2Sum,
        Check::SvRemark,
        Check::Separation,
        Check::Independence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Commutators => "commutators",
            Check::A2Cubic => "a2-cubic",
            Check::A2Pair => "a2-pair",
            Check::B2Quartic => "b2-quartic",
            Check::B2Sum => "b2-sum",
            Check::SvRemark => "sv-remark",
            Check::Separation => "separation",
            Check::Independence => "independence",
        }
    }

    /// The one system a check belongs to, or `None` for checks run per system.
    pub fn system(self) -> Option<System> {
        match self {
            Check::A2Cubic | Check::A2Pair | Check::SvRemark => Some(System::A2),
            Check::B2Quartic | Check::B2Sum => Some(System::B2),
            _ => None,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.to_ascii_lowercase();
        let c = match t.as_str() {
            "commutators" => Check::Commutators,
            "a2-cubic" | "cubic" => Check::A2Cubic,
            "a2-pair" | "pair" => Check::A2Pair,
            "b2-quartic" | "quartic" => Check::B2Quartic,
            "b2-sum" | "sum" => Check::B2Sum,
            "sv-remark" | "sv" => Check::SvRemark,
            "separation" => Check::Separation,
            "independence" => Check::Independence,
            _ => return Err(format!("unknown check {s:?}")),
        };
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Target {
    A1,
    A2,
    A3,
    B1,
    B2,
}

impl Target {
    pub const ALL: [Target; 5] = [Target::A1, Target::A2, Target::A3, Target::B1, Target::B2];

    pub fn system(self) -> System {
        match self {
            Target::A1 | Target::A2 | Target::A3 => System::A2,
            Target::B1 | Target::B2 => System::B2,
        }
    }

    fn index(self) -> usize {
        match self {
            Target::A1 | Target::B1 => 0,
            Target::A2 | Target::B2 => 1,
            Target::A3 => 2,
        }
    }

    /// The printed polynomial this target is compared against.
    pub fn printed(self) -> AbstractIntegralPoly {
        match self {
            Target::A1 => build_a_coefficients().a1,
            Target::A2 => build_a_coefficients().a2,
            Target::A3 => build_a_coefficients().a3,
            Target::B1 => build_b_coefficients().b1,
            Target::B2 => build_b_coefficients().b2,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Target::ALL
            .into_iter()
            .find(|t| t.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown target {s:?}"))
    }
}

/// Operators the coefficients are expressed in.
pub fn descent_basis(system: System) -> Vec<(&'static str, DiffOp)> {
    match system {
        System::A2 => vec![("L1", catalog::a2_l1()), ("L2", catalog::a2_l2()), ("L3", catalog::a2_l3())],
        System::B2 => {
            vec![("L", catalog::b2_l().scale_rational(&Rational::new(1, 2))), ("M", catalog::b2_m())]
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Derivation {
    pub target: Target,
    pub system: System,
    /// Human-readable form of `poly`.
    pub derived: String,
    pub canonical: String,
    pub diff: Vec<TermDiff>,
    /// `None` for the zero polynomial or an inhomogeneous result.
    pub weight: Option<u32>,
    pub inhomogeneous_terms: Vec<(u32, String)>,
    pub used_numerics: bool,
    #[serde(skip)]
    pub poly: AbstractIntegralPoly,
}

impl Derivation {
    pub fn matches(&self) -> bool {
        self.diff.is_empty()
    }
}

/// Shared state for one run: numeric settings, the optional operator cache
/// and a progress sink.
pub struct Session<'a> {
    pub cfg: CheckConfig,
    pub cache: Option<OperatorCache>,
    pub timing: bool,
    progress: Box<dyn Fn(&str) + 'a>,
    symmetric: Vec<(System, ElementarySymmetric)>,
    derived: Vec<(Target, Result<Derivation, String>)>,
}

impl<'a> Session<'a> {
    pub fn new(cfg: CheckConfig, cache: Option<OperatorCache>) -> Self {
        Session { cfg, cache, timing: false, progress: Box::new(|_| {}), symmetric: Vec::new(), derived: Vec::new() }
    }

    pub fn with_progress(mut self, f: impl Fn(&str) + 'a) -> Self {
        self.progress = Box::new(f);
        self
    }

    fn say(&self, msg: &str) {
        (self.progress)(msg)
    }

    pub fn elementary_symmetric(&mut self, system: System) -> Result<&ElementarySymmetric, RelationError> {
        if let Some(i) = self.symmetric.iter().position(|(s, _)| *s == system) {
            return Ok(&self.symmetric[i].1);
        }
        self.say(&format!("{system}: building elementary symmetric operators"));
        let cache = self.cache.clone();
        let progress = &self.progress;
        let es = derive_elementary_symmetric_with(system, &self.cfg, &mut |name, f| match &cache {
            Some(c) => {
                let (op, outcome) = c.get_or_compute::<RelationError>(name, system, || f())?;
                progress(&format!("cache {name}: {outcome:?}"));
                Ok(op)
            }
            None => f(),
        })?;
        self.symmetric.push((system, es));
        Ok(&self.symmetric.last().expect("just pushed").1)
    }

    /// Re-derives a coefficient by symbol descent and compares it with the
    /// printed formula. Results are memoized per session.
    pub fn derive(&mut self, target: Target) -> Result<Derivation, String> {
        if let Some((_, r)) = self.derived.iter().find(|(t, _)| *t == target) {
            return r.clone();
        }
        let r = self.derive_uncached(target).map_err(|e| e.to_string());
        self.derived.push((target, r.clone()));
        r
    }

    fn derive_uncached(&mut self, target: Target) -> Result<Derivation, RelationError> {
        let system = target.system();
        let op = self.elementary_symmetric(system)?.ops[target.index()].1.clone();
        self.say(&format!("{system}: descending {target}"));
        let out = express_in_integrals(system, &op, &descent_basis(system), &self.cfg)?;
        let printed = target.printed();
        let diff = AbstractIntegralPoly::term_diff(&printed, &out.poly)?;
        let (weight, inhomogeneous_terms) = match weighted_degree(system, &out.poly)? {
            WeightedDegree::Homogeneous(w) => (Some(w), Vec::new()),
            WeightedDegree::Zero => (None, Vec::new()),
            WeightedDegree::Inhomogeneous { offenders, .. } => (None, offenders),
        };
        Ok(Derivation {
            target,
            system,
            derived: out.poly.render(),
            canonical: out.poly.to_canonical_text(),
            diff,
            weight,
            inhomogeneous_terms,
            used_numerics: out.used_numerics(),
            poly: out.poly,
        })
    }

    fn failure(check: Check, system: System, err: impl fmt::Display) -> VerificationReport {
        VerificationReport::exact(check.name(), system, "run", false, Some(err.to_string()))
    }

    /// Runs one check on one system; internal errors become failed reports.
    pub fn run_check(&mut self, check: Check, system: System) -> Vec<VerificationReport> {
        if check.system().is_some_and(|s| s != system) {
            return Vec::new();
        }
        self.say(&format!("{system}: {check}"));
        let start = Instant::now();
        let mut reports =
            self.run_check_inner(check, system).unwrap_or_else(|e| vec![Self::failure(check, system, e)]);
        if self.timing {
            let ms = start.elapsed().as_millis() as u64;
            for r in &mut reports {
                r.elapsed_ms = Some(ms);
            }
        }
        reports
    }

    fn relation(
        &self,
        check: Check,
        system: System,
        rel: &AbstractIntegralPoly,
        binding: &Binding,
        subject: &str,
    ) -> Result<VerificationReport, RelationError> {
        let (r, _) = verify_relation(check.name(), system, rel, binding, &self.cfg)?;
        Ok(VerificationReport { subject: subject.to_string(), ..r })
    }

    fn run_check_inner(&mut self, check: Check, system: System) -> Result<Vec<VerificationReport>, RelationError> {
        Ok(match check {
            Check::Commutators => verify_commutators(system, &self.cfg)?,
            Check::A2Cubic => {
                let rel = a2_cubic_relation(&build_a_coefficients());
                let mut out = Vec::new();
                for pair in A2Pair::ALL {
                    let subject = format!("I^3 + A1 I^2 + A2 I + A3 = 0, I = {}", pair.name());
                    out.push(self.relation(check, system, &rel, &Binding::a2(Some(pair), None), &subject)?);
                }
                out
            }
            Check::A2Pair => {
                let rel = a2_pair_relation(&build_a_coefficients());
                let binding = Binding::a2(Some(A2Pair::I12), Some(A2Pair::I23));
                let subject = "I^2 + I J + J^2 + A1 (I + J) + A2 = 0, I = I12, J = I23";
                vec![self.relation(check, system, &rel, &binding, subject)?]
            }
            Check::B2Quartic | Check::B2Sum => {
                let b1 = self.derive(Target::B1).map_err(RelationError::Stalled)?;
                let (rel, subject) = if check == Check::B2Sum {
                    (b2_sum_relation(&b1.poly), "I^2 + J^2 + B1 = 0, I = Ix, J = Iy")
                } else {
                    let b2 = self.derive(Target::B2).map_err(RelationError::Stalled)?;
                    (b2_quartic_relation(&b1.poly, &b2.poly), "I^4 + B1 I^2 + B2 = 0, I = Ix")
                };
                let mut r = self.relation(check, system, &rel, &Binding::b2(), subject)?;
                r.note.get_or_insert_with(|| "coefficients are the derived polynomials".into());
                vec![r]
            }
            Check::SvRemark => vec![sv_remark_check(&build_a_coefficients())?.report],
            Check::Separation => separation_reports(system, self.cfg.seed)?,
            Check::Independence => {
                let out = symbol_independence_check(system, self.cfg.seed);
                let pass = out.independent();
                let note = format!("ranks {:?}, expected {}, resampled {}", out.ranks, out.expected_rank, out.resampled);
                vec![VerificationReport::exact("independence", system, "basis symbols", pass, Some(note))]
            }
        })
    }
}

fn constant_symbol(op: &DiffOp) -> Result<ConstSymbol, RelationError> {
    op.principal_symbol()?
        .structural_constant()
        .ok_or_else(|| RelationError::NotExpressible("principal symbol is not constant".into()))
}

/// Candidates and the number of distinct values each should take on a
/// generic fiber.
pub fn separation_candidates(system: System) -> Result<Vec<(&'static str, ConstSymbol, usize)>, RelationError> {
    Ok(match system {
        System::A2 => {
            let [a, b, c] = A2Pair::ALL.map(catalog::a2_i);
            let sum = a.add(&b)?.add(&c)?;
            let l4 = a.add(&b.scale_rational(&Rational::from_int(2)))?;
            vec![("I12 + I23 + I31", constant_symbol(&sum)?, 1), ("I12 + 2 I23", constant_symbol(&l4)?, 6)]
        }
        System::B2 => vec![("Ix + 2 Iy", constant_symbol(&catalog::b2_l3())?, 8)],
    })
}

fn separation_reports(system: System, seed: u64) -> Result<Vec<VerificationReport>, RelationError> {
    let n_basis = basis_symbols(system).len();
    let mut out = Vec::new();
    for (label, sym, expected) in separation_candidates(system)? {
        let s = separation_check(system, &sym, seed);
        let pass = s.fiber_consistent && s.distinct_values == expected;
        let note = format!(
            "{} distinct values on an orbit of {} (expected {expected}); {n_basis} basis symbols constant on the fiber: {}",
            s.distinct_values, s.orbit_size, s.fiber_consistent
        );
        out.push(VerificationReport::exact("separation", system, label, pass, Some(note)));
    }
    Ok(out)
}

/// Worst status over a set of reports; an empty set passes.
pub fn overall(reports: &[VerificationReport]) -> Status {
    reports.iter().fold(Status::Pass, |acc, r| acc.combine(r.status))
}
