//! Exact linear algebra over the rationals.

use crate::scalars::Rational;

/// Result of solving `A x = b`.
#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    /// A particular solution; `nullity` > 0 means it is not unique (free
    /// variables were set to zero).
    Solved { x: Vec<Rational>, nullity: usize },
    /// Index of an equation that cannot be satisfied.
    Inconsistent { row: usize },
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut [Vec<Rational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip().expect("nonzero pivot");
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &(&f * pv);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Solution {
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m, cols);
    for (i, row) in m.iter().enumerate().skip(pivots.len()) {
        if !row[cols].is_zero() {
            return Solution::Inconsistent { row: i };
        }
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols].clone();
    }
    Solution::Solved { x, nullity: cols - pivots.len() }
}

pub fn rank(a: &[Vec<Rational>]) -> usize {
    let cols = a.first().map_or(0, Vec::len);
    let mut m = a.to_vec();
    rref(&mut m, cols).len()
}
