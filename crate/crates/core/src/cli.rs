//! The `cmspec` command line.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cache::{CacheError, OperatorCache};
use crate::catalog::System;
use crate::numeric::{EllipticContext, Status};
use crate::pipeline::{overall, Check, Derivation, Session, Target};
use crate::relations::{CheckConfig, VerificationReport};
use crate::scalars::{Rational, DEFAULT_PRECISION_BITS, MIN_PRECISION_BITS};
use crate::selftest::{self, SuiteResult};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_DERIVATION_FAILURE: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

pub const REPORT_FORMAT: &str = "cmspec-report";
pub const REPORT_VERSION: u32 = 1;
pub const MIN_TRIALS: usize = 3;

#[derive(Debug, Parser)]
#[command(name = "cmspec", version, about = "Verify and re-derive spectral relations of elliptic Calogero-Moser integrals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verification checks.
    Verify,
    /// Re-derive relation coefficients and compare them with the printed ones.
    Derive,
    /// Run the engine invariant suites.
    Selftest,
    /// Manage the operator cache.
    Cache {
        #[arg(value_enum)]
        action: CacheAction,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CacheAction {
    /// Precompute the expensive operator products.
    Warm,
    /// Verify every entry's integrity.
    Check,
    /// Remove every entry.
    Clear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemArg {
    A2,
    B2,
    Both,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    #[arg(long, global = true, value_enum, default_value = "both")]
    pub system: SystemArg,
    /// Check name, or `all`; repeatable.
    #[arg(long = "check", global = true)]
    pub checks: Vec<String>,
    /// Derivation target (A1, A2, A3, B1, B2); repeatable.
    #[arg(long = "target", global = true)]
    pub targets: Vec<String>,
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision_bits: usize,
    /// Sample points per context.
    #[arg(long, global = true, default_value_t = 8)]
    pub trials: usize,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Curve invariants as "g2,g3" with rational entries p/q; repeatable.
    #[arg(long = "context", global = true)]
    pub contexts: Vec<String>,
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Write a JSON report to this path.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Record wall-clock times in the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

/// The validated configuration, echoed into the JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub systems: Vec<System>,
    pub checks: Vec<Check>,
    pub targets: Vec<Target>,
    pub precision_bits: usize,
    pub trials: usize,
    pub seed: u64,
    pub contexts: Vec<[String; 2]>,
    pub threads: Option<usize>,
    pub timing: bool,
    #[serde(skip)]
    pub elliptic: Vec<EllipticContext>,
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct DerivationFailure {
    pub target: Target,
    pub error: String,
}

#[derive(Debug, Serialize)]
pub struct ReportFile {
    pub format: &'static str,
    pub version: u32,
    pub config: RunConfig,
    pub exit_code: i32,
    pub reports: Vec<VerificationReport>,
    pub derivations: Vec<Derivation>,
    pub derivation_failures: Vec<DerivationFailure>,
    pub selftest: Vec<SuiteResult>,
}

fn parse_context(s: &str) -> Result<(Rational, Rational), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("context {s:?} is not of the form g2,g3"))?;
    let p = |t: &str| t.parse::<Rational>().map_err(|e| format!("context {s:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Verify => "verify",
        Command::Derive => "derive",
        Command::Selftest => "selftest",
        Command::Cache { action: CacheAction::Warm } => "cache warm",
        Command::Cache { action: CacheAction::Check } => "cache check",
        Command::Cache { action: CacheAction::Clear } => "cache clear",
    }
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<RunConfig, String> {
        let o = &cli.opts;
        if o.precision_bits < MIN_PRECISION_BITS {
            return Err(format!("--precision-bits must be at least {MIN_PRECISION_BITS}"));
        }
        if o.trials < MIN_TRIALS {
            return Err(format!("--trials must be at least {MIN_TRIALS}"));
        }
        if o.threads == Some(0) {
            return Err("--threads must be positive".into());
        }
        let explicit = match o.system {
            SystemArg::A2 => Some(System::A2),
            SystemArg::B2 => Some(System::B2),
            SystemArg::Both => None,
        };
        let mut systems: Vec<System> = explicit.map_or(vec![System::A2, System::B2], |s| vec![s]);

        let mut checks = Vec::new();
        for name in &o.checks {
            if name.eq_ignore_ascii_case("all") {
                checks.extend(Check::ALL);
                continue;
            }
            let c: Check = name.parse()?;
            if let (Some(s), Some(e)) = (c.system(), explicit) {
                if s != e {
                    return Err(format!("check {c} belongs to {s}, not {e}"));
                }
            }
            checks.push(c);
        }
        if checks.is_empty() {
            checks.extend(Check::ALL);
        }
        checks.sort();
        checks.dedup();

        let mut targets = Vec::new();
        for name in &o.targets {
            let t: Target = name.parse()?;
            if explicit.is_some_and(|s| s != t.system()) {
                return Err(format!("target {t} belongs to {}", t.system()));
            }
            targets.push(t);
        }
        if targets.is_empty() {
            targets.extend(Target::ALL.into_iter().filter(|t| systems.contains(&t.system())));
        } else if explicit.is_none() && matches!(cli.command, Command::Derive) {
            systems.retain(|s| targets.iter().any(|t| t.system() == *s));
        }
        targets.sort();
        targets.dedup();

        let elliptic = if o.contexts.is_empty() {
            EllipticContext::default_contexts(o.precision_bits).map_err(|e| e.to_string())?
        } else {
            let mut v = Vec::new();
            for s in &o.contexts {
                let (g2, g3) = parse_context(s)?;
                v.push(EllipticContext::new(g2, g3, o.precision_bits).map_err(|e| e.to_string())?);
            }
            v
        };
        let contexts = elliptic.iter().map(|c| [c.g2().to_short_string(), c.g3().to_short_string()]).collect();
        Ok(RunConfig {
            command: command_name(&cli.command).to_string(),
            systems,
            checks,
            targets,
            precision_bits: o.precision_bits,
            trials: o.trials,
            seed: o.seed,
            contexts,
            threads: o.threads,
            timing: o.timing,
            elliptic,
            cache_dir: o.cache_dir.clone(),
        })
    }

    pub fn check_config(&self) -> CheckConfig {
        CheckConfig::new(self.elliptic.clone(), self.trials, self.seed)
    }

    fn open_cache(&self) -> Result<Option<OperatorCache>, CacheError> {
        self.cache_dir.as_deref().map(OperatorCache::open).transpose()
    }
}

fn status_exit(s: Status) -> i32 {
    match s {
        Status::Pass => EXIT_PASS,
        Status::Fail => EXIT_FAIL,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn progress(msg: &str) {
    eprintln!("[cmspec] {msg}");
}

fn shorten(s: &str, max: usize) -> String {
    if s.chars().count() <= max {
        s.to_string()
    } else {
        format!("{}...", s.chars().take(max).collect::<String>())
    }
}

fn print_report(r: &VerificationReport) {
    let mut line = format!(
        "{:<12} {} {:<13} {}",
        r.status.to_string().to_uppercase(),
        r.system,
        r.check,
        shorten(&r.subject, 70)
    );
    if r.structural_zero {
        line.push_str("  [structurally zero]");
    } else if r.trials > 0 {
        line.push_str(&format!("  max ratio {:.3e}", r.max_residual_ratio));
    }
    println!("{line}");
    if !r.passed() {
        let worst = r.details.iter().max_by(|a, b| a.max_ratio.total_cmp(&b.max_ratio));
        if let Some(d) = worst {
            println!(
                "    failing coefficient d^{:?} ratio {:.3e} at point {} of context {}",
                d.coefficient_multiindex, d.max_ratio, d.point_index, d.context_index
            );
        }
    }
    if let Some(n) = &r.note {
        if !r.passed() || r.trials == 0 {
            println!("    {n}");
        }
    }
}

fn print_derivation(d: &Derivation) {
    println!("{} ({}) = {}", d.target, d.system, d.derived);
    match d.weight {
        Some(w) => println!("    weighted-homogeneous of weight {w}"),
        None if d.inhomogeneous_terms.is_empty() => println!("    zero"),
        None => println!("    not homogeneous; off-weight terms {:?}", d.inhomogeneous_terms),
    }
    if d.diff.is_empty() {
        println!("    diff vs printed: empty");
    } else {
        println!("    diff vs printed: {} terms", d.diff.len());
        for t in &d.diff {
            println!("      {}: printed {}, derived {}", t.monomial, t.expected, t.derived);
        }
    }
    if d.used_numerics {
        println!("    (lower-order cancellation certified numerically)");
    }
}

fn run_verify(cfg: &RunConfig, session: &mut Session) -> ReportFile {
    let mut reports = Vec::new();
    for &system in &cfg.systems {
        for &check in &cfg.checks {
            for r in session.run_check(check, system) {
                print_report(&r);
                reports.push(r);
            }
        }
    }
    let status = overall(&reports);
    println!("overall: {status} ({} reports)", reports.len());
    report_file(cfg, status_exit(status), reports, Vec::new(), Vec::new(), Vec::new())
}

fn run_derive(cfg: &RunConfig, session: &mut Session) -> ReportFile {
    let (mut derivations, mut failures) = (Vec::new(), Vec::new());
    let mut code = EXIT_PASS;
    for &t in &cfg.targets {
        match session.derive(t) {
            Ok(d) => {
                print_derivation(&d);
                if !d.matches() {
                    code = code.max(EXIT_MISMATCH);
                }
                derivations.push(d);
            }
            Err(e) => {
                println!("{t}: derivation failed: {e}");
                code = EXIT_DERIVATION_FAILURE;
                failures.push(DerivationFailure { target: t, error: e });
            }
        }
    }
    report_file(cfg, code, Vec::new(), derivations, failures, Vec::new())
}

fn run_selftest(cfg: &RunConfig) -> ReportFile {
    let results = selftest::run(&cfg.elliptic, cfg.seed);
    for r in &results {
        let s = if r.passed { "PASS" } else { "FAIL" };
        println!("{s:<5} {:<14} {} ({} cases)", r.suite, r.property, r.cases);
        if let Some(d) = &r.detail {
            println!("    {d}");
        }
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("selftest: {passed}/{} properties hold", results.len());
    let code = if passed == results.len() { EXIT_PASS } else { EXIT_FAIL };
    report_file(cfg, code, Vec::new(), Vec::new(), Vec::new(), results)
}

fn run_cache(cfg: &RunConfig, action: CacheAction, session: &mut Session) -> Result<i32, String> {
    let cache = session.cache.clone().ok_or("cache commands need --cache-dir")?;
    match action {
        CacheAction::Warm => {
            for &s in &cfg.systems {
                session.elementary_symmetric(s).map_err(|e| e.to_string())?;
            }
            println!("cache warm: {}", cache.dir().display());
            Ok(EXIT_PASS)
        }
        CacheAction::Check => {
            let mut bad = 0;
            let entries = cache.entries().map_err(|e| e.to_string())?;
            for (path, e) in &entries {
                let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                match e {
                    Ok(e) if cache.is_current(e) => println!("ok      {} {name}", e.name),
                    Ok(e) => println!("stale   {} {name}", e.name),
                    Err(err) => {
                        bad += 1;
                        println!("corrupt {name}: {err}");
                    }
                }
            }
            println!("cache check: {} entries, {bad} corrupt", entries.len());
            Ok(if bad == 0 { EXIT_PASS } else { EXIT_FAIL })
        }
        CacheAction::Clear => {
            let n = cache.clear().map_err(|e| e.to_string())?;
            println!("cache clear: removed {n} entries");
            Ok(EXIT_PASS)
        }
    }
}

fn report_file(
    cfg: &RunConfig,
    exit_code: i32,
    reports: Vec<VerificationReport>,
    derivations: Vec<Derivation>,
    derivation_failures: Vec<DerivationFailure>,
    selftest: Vec<SuiteResult>,
) -> ReportFile {
    ReportFile {
        format: REPORT_FORMAT,
        version: REPORT_VERSION,
        config: cfg.clone(),
        exit_code,
        reports,
        derivations,
        derivation_failures,
        selftest,
    }
}

fn execute(cli: &Cli, cfg: &RunConfig) -> i32 {
    let cache = match cfg.open_cache() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut session = Session::new(cfg.check_config(), cache).with_progress(progress);
    session.timing = cfg.timing;
    let file = match &cli.command {
        Command::Verify => run_verify(cfg, &mut session),
        Command::Derive => run_derive(cfg, &mut session),
        Command::Selftest => run_selftest(cfg),
        Command::Cache { action } => {
            return match run_cache(cfg, *action, &mut session) {
                Ok(code) => code,
                Err(e) if session.cache.is_none() => {
                    eprintln!("error: {e}");
                    EXIT_USAGE
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_FAIL
                }
            };
        }
    };
    if let Some(path) = &cli.opts.report {
        let json = serde_json::to_string_pretty(&file).expect("report serializes");
        if let Err(e) = fs::write(path, json + "\n") {
            eprintln!("error: writing {}: {e}", path.display());
            return EXIT_FAIL.max(file.exit_code);
        }
        progress(&format!("report written to {}", path.display()));
    }
    file.exit_code
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match RunConfig::from_cli(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match cfg.threads {
        None => execute(&cli, &cfg),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli, &cfg)),
            Err(e) => {
                eprintln!("error: thread pool: {e}");
                EXIT_USAGE
            }
        },
    }
}
