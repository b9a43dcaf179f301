//! The commuting operators of the A2 and B2 elliptic Calogero–Moser systems,
//! transcribed term by term from their printed form.
//!
//! Each table row is one printed term in the expression language of
//! [`crate::expr`]: `p`, `pp`, `ppp` are ℘, ℘′, ℘″ of a linear argument and
//! `d<var>` is the partial derivative. Products compose as operators, so a
//! coefficient written left of a derivative multiplies it.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffop::{DiffOp, DiffOpError};
use crate::elliptic::{EllipticError, EllipticPoly};
use crate::expr::{self, Expr, ExprAlgebra, ExprError};
use crate::scalars::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    DiffOp(#[from] DiffOpError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error("unknown name {0:?}")]
    UnknownName(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    A2,
    B2,
}

impl System {
    pub fn vars(self) -> &'static [&'static str] {
        match self {
            System::A2 => &["x1", "x2", "x3"],
            System::B2 => &["x", "y"],
        }
    }

    pub fn n_vars(self) -> usize {
        self.vars().len()
    }

    pub fn var_names(self) -> Vec<String> {
        self.vars().iter().map(|s| s.to_string()).collect()
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            System::A2 => "a2",
            System::B2 => "b2",
        })
    }
}

impl std::str::FromStr for System {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "a2" => Ok(System::A2),
            "b2" => Ok(System::B2),
            _ => Err(format!("unknown system {s:?}")),
        }
    }
}

/// A correction applied to a printed row before construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Amendment {
    pub row: usize,
    pub printed: &'static str,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Copy)]
pub struct OperatorTable {
    pub name: &'static str,
    pub system: System,
    pub rows: &'static [&'static str],
    pub amendments: &'static [Amendment],
}

pub const A2_L1: OperatorTable = OperatorTable {
    name: "L1",
    system: System::A2,
    rows: &["-d1^2", "-d2^2", "-d3^2", "4(p(x1-x2) + p(x2-x3) + p(x3-x1))"],
    amendments: &[],
};

pub const A2_L2: OperatorTable = OperatorTable {
    name: "L2",
    system: System::A2,
    rows: &["d1 + d2 + d3"],
    amendments: &[],
};

pub const A2_L3: OperatorTable = OperatorTable {
    name: "L3",
    system: System::A2,
    rows: &["d1 d2 d3", "2p(x1-x2) d3", "2p(x2-x3) d1", "2p(x3-x1) d2"],
    amendments: &[],
};

pub const A2_I12: OperatorTable = OperatorTable {
    name: "I12",
    system: System::A2,
    rows: &[
        "(d1-d3)^2 (d2-d3)^2",
        "-8p(x2-x3)(d1-d3)^2",
        "-8p(x1-x3)(d2-d3)^2",
        "4(p(x1-x2) - p(x1-x3) - p(x2-x3))(d1-d3)(d2-d3)",
        "-2(pp(x1-x2) + pp(x1-x3) + 6pp(x2-x3))(d1-d3)",
        "-2(-pp(x1-x2) + 6pp(x1-x3) + pp(x2-x3))(d2-d3)",
        "-2ppp(x1-x2) - 6ppp(x1-x3) - 6ppp(x2-x3)",
        "4(p(x1-x2)^2 + p(x1-x3)^2 + p(x2-x3)^2)",
        "8(p(x1-x2)p(x1-x3) + p(x1-x2)p(x2-x3) + 7p(x1-x3)p(x2-x3))",
    ],
    amendments: &[],
};

pub const B2_L: OperatorTable = OperatorTable {
    name: "L",
    system: System::B2,
    rows: &["-dx^2", "-dy^2", "2(p(x) + p(y) + 2p(x+y) + 2p(x-y))"],
    amendments: &[],
};

pub const B2_M: OperatorTable = OperatorTable {
    name: "M",
    system: System::B2,
    rows: &[
        "dx^2 dy^2",
        "-2p(y) dx^2",
        "-2p(x) dy^2",
        "-4(p(x+y) - p(x-y)) dx dy",
        "-2(pp(x+y) + pp(x-y)) dx",
        "-2(pp(x+y) - pp(x-y)) dy",
        "-2(ppp(x+y) + ppp(x-y))",
        "4(p(x+y)^2 + p(x-y)^2)",
        "4(p(x) + p(y))(p(x+y) + p(x-y))",
        "-8p(x+y)p(x-y)",
        "-4p(x)p(y)",
    ],
    amendments: &[],
};

pub const B2_IX: OperatorTable = OperatorTable {
    name: "Ix",
    system: System::B2,
    rows: &[
        "dx^5",
        "-5dx^3 dy^2",
        "-10(1/2p(x) - p(y) + p(x+y) + p(x-y)) dx^3",
        "30(p(x+y) - p(x-y)) dx^2 dy",
        "15p(x) dx dy^2",
        "-15/2 pp(x)(dx^2 - dy^2)",
        "30(pp(x+y) - pp(x-y)) dx dy",
        "(10ppp(x+y) - 10ppp(x-y) - 30p(x)(p(x+y) - p(x-y))) dy",
        "(30p(y)(p(x) - p(x+y) - p(x-y)) + 120p(x+y)p(x-y) + 10ppp(x+y) + 10ppp(x-y) - 5ppp(x) - 9/2g2) dx",
        "-15(pp(x+y) + pp(x-y))(p(x) + p(y))",
        "-15(pp(x)p(x) - pp(x)p(y))",
        "60(pp(x+y) + pp(x-y))(p(x+y) + p(x-y))",
    ],
    amendments: &[
        Amendment {
            row: 5,
            printed: "-15/2 p(x)(dx^2 - dy^2)",
            reason: "printed term has weight 4 in a weight-5 operator; read as the derivative",
        },
        Amendment {
            row: 6,
            printed: "30(p(x+y) - p(x-y)) dx dy",
            reason: "printed term has weight 4 in a weight-5 operator; read as the derivative",
        },
        Amendment {
            row: 7,
            printed: "(10ppp(x+y) - 10ppp(x-y) - 30p(y)(p(x+y) - p(x-y))) dy",
            reason: "the commutator with L vanishes only with p(x) in the last product",
        },
        Amendment {
            row: 10,
            printed: "-15(pp(x)p(y) + pp(y)p(x))",
            reason: "printed term is not odd in x; the commutator with L fixes it uniquely given the other rows",
        },
    ],
};

pub const ALL_TABLES: &[OperatorTable] = &[A2_L1, A2_L2, A2_L3, A2_I12, B2_L, B2_M, B2_IX];

/// Operator-valued expression evaluation over a fixed variable set.
#[derive(Clone)]
struct OpValue<'a> {
    vars: &'a [&'a str],
    op: DiffOp,
}

impl<'a> OpValue<'a> {
    fn with(&self, op: DiffOp) -> Self {
        OpValue { vars: self.vars, op }
    }
}

impl<'a> ExprAlgebra for OpValue<'a> {
    type Error = CatalogError;

    fn from_rational(&self, r: &Rational) -> Self {
        self.with(DiffOp::rational(self.vars.len(), r.clone()))
    }

    fn var(&self, name: &str) -> Result<Self, CatalogError> {
        let n = self.vars.len();
        match name {
            "g2" => Ok(self.with(DiffOp::scalar(n, EllipticPoly::g2()))),
            "g3" => Ok(self.with(DiffOp::scalar(n, EllipticPoly::g3()))),
            _ => {
                let i = name
                    .strip_prefix('d')
                    .and_then(|v| self.vars.iter().position(|x| *x == v || x.strip_prefix('x') == Some(v)))
                    .ok_or_else(|| CatalogError::UnknownName(name.to_string()))?;
                Ok(self.with(DiffOp::derivative(n, i)))
            }
        }
    }

    fn call(&self, name: &str, arg: &Expr) -> Result<Self, CatalogError> {
        let a = arg.linear_form(self.vars)?;
        let f = match name {
            "p" => EllipticPoly::wp(&a)?,
            "pp" => EllipticPoly::wp_prime(&a)?,
            "ppp" => EllipticPoly::wp_second(&a)?,
            _ => return Err(CatalogError::UnknownName(name.to_string())),
        };
        Ok(self.with(DiffOp::scalar(self.vars.len(), f)))
    }

    fn add(&self, other: &Self) -> Result<Self, CatalogError> {
        Ok(self.with(self.op.add(&other.op)?))
    }

    fn sub(&self, other: &Self) -> Result<Self, CatalogError> {
        Ok(self.with(self.op.sub(&other.op)?))
    }

    fn mul(&self, other: &Self) -> Result<Self, CatalogError> {
        Ok(self.with(self.op.compose(&other.op)?))
    }

    fn neg(&self) -> Self {
        self.with(self.op.neg())
    }

    fn scale(&self, r: &Rational) -> Self {
        self.with(self.op.scale_rational(r))
    }
}

/// Builds the operator described by one expression in the given system.
pub fn operator_from_expr(system: System, text: &str) -> Result<DiffOp, CatalogError> {
    let e = expr::parse(text)?;
    let ctx = OpValue { vars: system.vars(), op: DiffOp::zero(system.n_vars()) };
    Ok(e.eval(&ctx)?.op)
}

impl OperatorTable {
    pub fn build(&self) -> Result<DiffOp, CatalogError> {
        self.build_rows(self.rows)
    }

    /// The operator with amendments reverted, exactly as printed.
    pub fn build_printed(&self) -> Result<DiffOp, CatalogError> {
        self.build_rows(&self.printed_rows())
    }

    pub fn printed_rows(&self) -> Vec<&'static str> {
        let mut rows = self.rows.to_vec();
        for a in self.amendments {
            rows[a.row] = a.printed;
        }
        rows
    }

    fn build_rows(&self, rows: &[&str]) -> Result<DiffOp, CatalogError> {
        let mut acc = DiffOp::zero(self.system.n_vars());
        for row in rows {
            acc = acc.add(&operator_from_expr(self.system, row)?)?;
        }
        Ok(acc)
    }

    /// Row-by-row listing in printed order, marking amended rows.
    pub fn listing(&self) -> String {
        let mut out = format!("{} ({}):\n", self.name, self.system);
        for (i, row) in self.rows.iter().enumerate() {
            let lead = if i == 0 { "  " } else { "+ " };
            out.push_str(&format!("{:>3} {lead}{row}\n", i + 1));
            if let Some(a) = self.amendments.iter().find(|a| a.row == i) {
                out.push_str(&format!("      printed: {}  [{}]\n", a.printed, a.reason));
            }
        }
        out
    }
}

fn build(t: &OperatorTable) -> DiffOp {
    t.build().expect("catalog tables are well formed")
}

pub fn a2_l1() -> DiffOp {
    build(&A2_L1)
}

pub fn a2_l2() -> DiffOp {
    build(&A2_L2)
}

pub fn a2_l3() -> DiffOp {
    build(&A2_L3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum A2Pair {
    I12,
    I23,
    I31,
}

impl A2Pair {
    pub const ALL: [A2Pair; 3] = [A2Pair::I12, A2Pair::I23, A2Pair::I31];

    pub fn name(self) -> &'static str {
        match self {
            A2Pair::I12 => "I12",
            A2Pair::I23 => "I23",
            A2Pair::I31 => "I31",
        }
    }
}

/// Cyclic relabeling 1→2→3→1 as a variable permutation x_i ↦ x_perm[i].
pub const A2_CYCLE: [usize; 3] = [1, 2, 0];

pub fn a2_i(pair: A2Pair) -> DiffOp {
    let base = build(&A2_I12);
    let once = |op: &DiffOp| op.permute_vars(&A2_CYCLE).expect("three variables");
    match pair {
        A2Pair::I12 => base,
        A2Pair::I23 => once(&base),
        A2Pair::I31 => once(&once(&base)),
    }
}

pub fn b2_l() -> DiffOp {
    build(&B2_L)
}

pub fn b2_m() -> DiffOp {
    build(&B2_M)
}

pub const B2_SWAP: [usize; 2] = [1, 0];

pub fn b2_ix() -> DiffOp {
    build(&B2_IX)
}

pub fn b2_iy() -> DiffOp {
    b2_ix().permute_vars(&B2_SWAP).expect("two variables")
}

pub fn b2_l3() -> DiffOp {
    b2_ix()
        .add(&b2_iy().scale_rational(&Rational::from_int(2)))
        .expect("same variable count")
}

/// Looks up a catalog operator by name, e.g. `"L1"`, `"I23"`, `"Ix"`.
pub fn by_name(system: System, name: &str) -> Option<DiffOp> {
    Some(match (system, name) {
        (System::A2, "L1") => a2_l1(),
        (System::A2, "L2") => a2_l2(),
        (System::A2, "L3") => a2_l3(),
        (System::A2, "I12") => a2_i(A2Pair::I12),
        (System::A2, "I23") => a2_i(A2Pair::I23),
        (System::A2, "I31") | (System::A2, "I13") => a2_i(A2Pair::I31),
        (System::B2, "L") | (System::B2, "L1") => b2_l(),
        (System::B2, "M") | (System::B2, "L2") => b2_m(),
        (System::B2, "Ix") | (System::B2, "I") => b2_ix(),
        (System::B2, "Iy") | (System::B2, "J") => b2_iy(),
        (System::B2, "L3") => b2_l3(),
        _ => return None,
    })
}

#[cfg(test)]
mod tests;
