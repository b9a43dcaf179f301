use serde::{Deserialize, Serialize};

use crate::catalog::System;
use crate::numeric::{CoefficientDetail, EllipticContext, NumericError, OracleOutcome, Status};
use crate::scalars::DEFAULT_PRECISION_BITS;

/// Numeric settings shared by every oracle-backed check.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub contexts: Vec<EllipticContext>,
    pub trials: usize,
    pub seed: u64,
}

impl CheckConfig {
    pub fn new(contexts: Vec<EllipticContext>, trials: usize, seed: u64) -> Self {
        CheckConfig { contexts, trials, seed }
    }

    /// The three default curves at 256 bits, 8 points each, seed 42.
    pub fn standard() -> Result<Self, NumericError> {
        Ok(CheckConfig::new(EllipticContext::default_contexts(DEFAULT_PRECISION_BITS)?, 8, 42))
    }

    pub fn precision_bits(&self) -> usize {
        self.contexts.iter().map(|c| c.precision_bits()).min().unwrap_or(DEFAULT_PRECISION_BITS)
    }

    pub fn context_labels(&self) -> Vec<[String; 2]> {
        self.contexts.iter().map(|c| [c.g2().to_short_string(), c.g3().to_short_string()]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub system: System,
    /// What was tested, e.g. `[L1, I12]` or the relation with its binding.
    pub subject: String,
    pub status: Status,
    pub max_residual_ratio: f64,
    pub witness_scale: f64,
    pub trials: usize,
    pub seed: u64,
    pub precision_bits: usize,
    pub contexts: Vec<[String; 2]>,
    /// Wall-clock time; only filled in on request since it breaks
    /// byte-identical reports.
    pub elapsed_ms: Option<u64>,
    pub structural_zero: bool,
    pub details: Vec<CoefficientDetail>,
    pub note: Option<String>,
}

impl VerificationReport {
    pub fn from_oracle(check: &str, system: System, subject: &str, o: &OracleOutcome, cfg: &CheckConfig) -> Self {
        VerificationReport {
            check: check.to_string(),
            system,
            subject: subject.to_string(),
            status: o.status,
            max_residual_ratio: o.max_ratio,
            witness_scale: o.witness_scale,
            trials: o.trials,
            seed: cfg.seed,
            precision_bits: cfg.precision_bits(),
            contexts: cfg.context_labels(),
            elapsed_ms: None,
            structural_zero: o.structural_zero,
            details: o.details.clone(),
            note: o.note.clone(),
        }
    }

    /// A report for an exact (non-numeric) check.
    pub fn exact(check: &str, system: System, subject: &str, pass: bool, note: Option<String>) -> Self {
        VerificationReport {
            check: check.to_string(),
            system,
            subject: subject.to_string(),
            status: if pass { Status::Pass } else { Status::Fail },
            max_residual_ratio: if pass { 0.0 } else { 1.0 },
            witness_scale: 0.0,
            trials: 0,
            seed: 0,
            precision_bits: 0,
            contexts: Vec::new(),
            elapsed_ms: None,
            structural_zero: false,
            details: Vec::new(),
            note,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}
