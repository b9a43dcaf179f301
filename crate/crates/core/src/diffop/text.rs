//! Canonical text serialization of operators, used by the on-disk cache.
//!
//! ```text
//! cmspec-diffop 1
//! n 2
//! vars x y
//! [2,0] | 1 : -1/1
//! [0,0] | P[1,0]^1 : 2/1
//! sha256 <hex digest of the term lines>
//! ```

use sha2::{Digest, Sha256};

use super::{DiffOp, DiffOpError, MultiIndex};
use crate::elliptic::{parse_monomial, write_monomial, EllipticPoly};
use crate::scalars::Rational;

pub const DIFFOP_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "cmspec-diffop";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedDiffOp {
    pub op: DiffOp,
    pub vars: Vec<String>,
}

fn body_lines(op: &DiffOp) -> Vec<String> {
    let mut lines = Vec::new();
    for (a, f) in op.terms() {
        for (m, c) in f.terms() {
            lines.push(format!("{a} | {} : {c}", write_monomial(m)));
        }
    }
    lines
}

pub(crate) fn digest(lines: &[String]) -> String {
    let mut h = Sha256::new();
    for l in lines {
        h.update(l.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

impl DiffOp {
    pub fn to_canonical_text(&self, vars: &[String]) -> String {
        assert_eq!(vars.len(), self.n_vars(), "one name per variable");
        let body = body_lines(self);
        let mut out = format!("{MAGIC} {DIFFOP_FORMAT_VERSION}\nn {}\nvars {}\n", self.n_vars(), vars.join(" "));
        for l in &body {
            out.push_str(l);
            out.push('\n');
        }
        out.push_str(&format!("sha256 {}\n", digest(&body)));
        out
    }

    /// Digest of the canonical body; equal operators have equal digests.
    pub fn content_hash(&self) -> String {
        digest(&body_lines(self))
    }

    pub fn parse_canonical_text(text: &str) -> Result<ParsedDiffOp, DiffOpError> {
        let perr = |m: String| DiffOpError::Parse(m);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| perr("empty input".into()))?;
        let version = header
            .strip_prefix(MAGIC)
            .map(str::trim)
            .ok_or_else(|| perr(format!("bad header {header:?}")))?;
        if version != DIFFOP_FORMAT_VERSION.to_string() {
            return Err(perr(format!("unsupported version {version}")));
        }
        let n: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("n "))
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| perr("missing variable count".into()))?;
        if n > crate::elliptic::MAX_VARS {
            return Err(DiffOpError::TooManyVariables(n));
        }
        let vars: Vec<String> = lines
            .next()
            .and_then(|l| l.strip_prefix("vars"))
            .map(|v| v.split_whitespace().map(String::from).collect())
            .ok_or_else(|| perr("missing variable names".into()))?;
        if vars.len() != n {
            return Err(perr("variable names do not match n".into()));
        }
        let mut body = Vec::new();
        let mut expected = None;
        for line in lines {
            if let Some(h) = line.strip_prefix("sha256 ") {
                expected = Some(h.trim().to_string());
                break;
            }
            body.push(line.to_string());
        }
        let expected = expected.ok_or_else(|| perr("missing integrity trailer".into()))?;
        let computed = digest(&body);
        if expected != computed {
            return Err(DiffOpError::Integrity { expected, computed });
        }
        let mut terms = Vec::new();
        for line in &body {
            let (idx, rest) = line
                .split_once(" | ")
                .ok_or_else(|| perr(format!("bad term line {line:?}")))?;
            let (mono, coeff) = rest
                .rsplit_once(" : ")
                .ok_or_else(|| perr(format!("bad term line {line:?}")))?;
            let orders: Vec<u8> = idx
                .trim()
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| perr(format!("bad multi-index {idx:?}")))?
                .split(',')
                .map(|o| o.trim().parse::<u8>())
                .collect::<Result<_, _>>()
                .map_err(|_| perr(format!("bad multi-index {idx:?}")))?;
            if orders.len() != n {
                return Err(perr(format!("multi-index {idx} has wrong length")));
            }
            let c: Rational = coeff.parse().map_err(|_| perr(format!("bad coefficient {coeff:?}")))?;
            let m = parse_monomial(mono)?;
            terms.push((MultiIndex::new(&orders), EllipticPoly::from_terms([(m, c)])));
        }
        Ok(ParsedDiffOp { op: DiffOp::from_terms(n, terms), vars })
    }
}
