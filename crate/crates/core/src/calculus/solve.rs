//! Symbolic Gaussian elimination for small linear systems of expressions.

use super::expr::Expr;
use crate::error::{Error, Result};

/// Solution of an overdetermined system `A X = B`.
#[derive(Debug, Clone)]
pub struct SymbolicSolution {
    /// `n × k` solution, one row per unknown.
    pub x: Vec<Vec<Expr>>,
    /// Reduced right-hand sides of the non-pivot rows; all vanish iff the
    /// system is consistent, which callers verify numerically.
    pub residual_rows: Vec<Vec<Expr>>,
    /// Indices of the rows of `A` used as pivots, one per unknown.
    pub pivots: Vec<usize>,
}

/// Solves the `m × n` system `A X = B` (`m ≥ n`) by elimination, choosing
/// each pivot as the largest entry at `reference`.
///
/// Pivots whose magnitude at `reference` is below `1e-12` make the system
/// singular there.
pub fn solve_at(a: &[Vec<Expr>], b: &[Vec<Expr>], reference: &[f64]) -> Result<SymbolicSolution> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let k = b.first().map_or(0, Vec::len);
    if b.len() != m || a.iter().any(|r| r.len() != n) || b.iter().any(|r| r.len() != k) {
        return Err(Error::shape("ragged linear system"));
    }
    if m < n {
        return Err(Error::SingularSystem(format!("{m} equations for {n} unknowns")));
    }
    // Augmented rows [A | B] with their original indices.
    let mut rows: Vec<(usize, Vec<Expr>)> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (ra, rb))| (i, ra.iter().chain(rb).cloned().collect()))
        .collect();
    let mut done: Vec<(usize, Vec<Expr>)> = Vec::with_capacity(n);
    for col in 0..n {
        let mut best: Option<(usize, f64)> = None;
        for (pos, (_, row)) in rows.iter().enumerate() {
            if row[col].is_zero() {
                continue;
            }
            let v = row[col].eval(reference).map(f64::abs).unwrap_or(0.0);
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((pos, v));
            }
        }
        let (pos, mag) =
            best.ok_or_else(|| Error::SingularSystem(format!("column {} vanishes identically", col + 1)))?;
        if mag < 1e-12 {
            return Err(Error::SingularSystem(format!(
                "pivot for column {} vanishes at {reference:?}",
                col + 1
            )));
        }
        let (orig, pivot_row) = rows.remove(pos);
        let inv = pivot_row[col].recip()?;
        for (_, row) in rows.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].mul(&inv);
            for c in col..n + k {
                if c == col {
                    row[c] = Expr::zero();
                } else if !pivot_row[c].is_zero() {
                    row[c] = row[c].sub(&factor.mul(&pivot_row[c]));
                }
            }
        }
        done.push((orig, pivot_row));
    }
    // Back substitution.
    let mut x = vec![vec![Expr::zero(); k]; n];
    for col in (0..n).rev() {
        let row = &done[col].1;
        let inv = row[col].recip()?;
        for r in 0..k {
            let mut acc = row[n + r].clone();
            for (c, xc) in x.iter().enumerate().skip(col + 1) {
                if !row[c].is_zero() {
                    acc = acc.sub(&row[c].mul(&xc[r]));
                }
            }
            x[col][r] = acc.mul(&inv);
        }
    }
    let residual_rows = rows.into_iter().map(|(_, row)| row[n..].to_vec()).collect();
    Ok(SymbolicSolution {
        x,
        residual_rows,
        pivots: done.into_iter().map(|(i, _)| i).collect(),
    })
}
