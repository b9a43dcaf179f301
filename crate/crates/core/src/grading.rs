//! Weighted degree under the lattice scaling ℘ ↦ 2, ℘′ ↦ 3, g2 ↦ 4, g3 ↦ 6,
//! e_i ↦ 2, ∂ ↦ 1.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

pub const WEIGHT_WP: u32 = 2;
pub const WEIGHT_WP_PRIME: u32 = 3;
pub const WEIGHT_G2: u32 = 4;
pub const WEIGHT_G3: u32 = 6;
pub const WEIGHT_E: u32 = 2;
pub const WEIGHT_DERIVATIVE: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum WeightedDegree {
    /// The zero object has every weight.
    Zero,
    Homogeneous(u32),
    /// `dominant` is the most frequent weight; `offenders` lists the terms
    /// (rendered) whose weight differs from it.
    Inhomogeneous {
        dominant: u32,
        offenders: Vec<(u32, String)>,
    },
}

impl WeightedDegree {
    pub fn is_homogeneous(&self) -> bool {
        !matches!(self, WeightedDegree::Inhomogeneous { .. })
    }

    pub fn weight(&self) -> Option<u32> {
        match self {
            WeightedDegree::Homogeneous(w) => Some(*w),
            _ => None,
        }
    }

    /// Classifies a list of (weight, rendered term) pairs.
    pub fn from_terms<I>(terms: I) -> WeightedDegree
    where
        I: IntoIterator<Item = (u32, String)>,
    {
        let terms: Vec<(u32, String)> = terms.into_iter().collect();
        if terms.is_empty() {
            return WeightedDegree::Zero;
        }
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for (w, _) in &terms {
            *counts.entry(*w).or_default() += 1;
        }
        if counts.len() == 1 {
            return WeightedDegree::Homogeneous(terms[0].0);
        }
        // BTreeMap iteration is ascending, so ties resolve to the lowest weight.
        let dominant = counts
            .iter()
            .fold((0u32, 0usize), |best, (&w, &c)| if c > best.1 { (w, c) } else { best })
            .0;
        let offenders = terms.into_iter().filter(|(w, _)| *w != dominant).collect();
        WeightedDegree::Inhomogeneous { dominant, offenders }
    }
}

impl fmt::Display for WeightedDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightedDegree::Zero => write!(f, "zero"),
            WeightedDegree::Homogeneous(w) => write!(f, "{w}"),
            WeightedDegree::Inhomogeneous { dominant, offenders } => {
                write!(f, "inhomogeneous (dominant {dominant};")?;
                for (w, t) in offenders {
                    write!(f, " [{w}] {t};")?;
                }
                write!(f, ")")
            }
        }
    }
}
