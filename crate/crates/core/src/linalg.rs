//! Numerical rank, null spaces and subspace comparisons.
//!
//! A singular value counts as zero when `σ ≤ 1e-9 · max(σ_max, 1)`; every
//! rank-based decision in the crate goes through [`rank`].

use nalgebra::{DMatrix, DVector};

pub const RANK_RTOL: f64 = 1e-9;

fn threshold(sv: &DVector<f64>) -> f64 {
    RANK_RTOL * sv.iter().cloned().fold(1.0, f64::max)
}

fn is_empty(m: &DMatrix<f64>) -> bool {
    m.nrows() == 0 || m.ncols() == 0
}

pub fn rank(m: &DMatrix<f64>) -> usize {
    if is_empty(m) {
        return 0;
    }
    let sv = m.singular_values();
    let tol = threshold(&sv);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Orthonormal basis (as columns) of `{v : m v = 0}`.
pub fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    // Pad to at least n rows so the SVD returns a full right basis.
    let rows = m.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let tol = threshold(&svd.singular_values);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn column_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    if is_empty(m) {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let tol = threshold(&svd.singular_values);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tol)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// `|v − Q Qᵀ v|` for an orthonormal basis `q`.
pub fn span_residual(q: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    if q.ncols() == 0 {
        return v.norm();
    }
    (v - q * (q.transpose() * v)).norm()
}

/// Least-squares distance from `v` to the column space of `m`.
pub fn distance_to_span(m: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    span_residual(&column_basis(m), v)
}

pub fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows(), "row counts differ");
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((0, a.ncols()), (b.nrows(), b.ncols())).copy_from(b);
    out
}

pub fn vstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.ncols(), "column counts differ");
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((a.nrows(), 0), (b.nrows(), b.ncols())).copy_from(b);
    out
}

/// `dim(span A ∩ span B) = rank A + rank B − rank [A B]`.
pub fn intersection_dim(a: &DMatrix<f64>, b: &DMatrix<f64>) -> usize {
    (rank(a) + rank(b)).saturating_sub(rank(&hstack(a, b)))
}

/// Outcome of comparing two column spans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceComparison {
    pub rank_a: usize,
    pub rank_b: usize,
    pub rank_union: usize,
    /// Largest distance of a column of either matrix from the other span.
    pub residual: f64,
}

impl SubspaceComparison {
    /// Equality by the three-rank test.
    pub fn equal(&self) -> bool {
        self.rank_a == self.rank_b && self.rank_b == self.rank_union
    }

    /// `span A ⊆ span B`.
    pub fn a_in_b(&self) -> bool {
        self.rank_b == self.rank_union
    }

    /// Residual folding in the rank defect, zero iff the spans agree exactly.
    pub fn defect(&self) -> f64 {
        let rank_gap = (self.rank_union - self.rank_a.min(self.rank_b)) as f64;
        if self.equal() {
            self.residual
        } else {
            rank_gap + self.residual
        }
    }
}

pub fn compare_spans(a: &DMatrix<f64>, b: &DMatrix<f64>) -> SubspaceComparison {
    let qa = column_basis(a);
    let qb = column_basis(b);
    let dist = |q: &DMatrix<f64>, m: &DMatrix<f64>| {
        m.column_iter()
            .map(|c| span_residual(q, &c.into_owned()))
            .fold(0.0, f64::max)
    };
    SubspaceComparison {
        rank_a: qa.ncols(),
        rank_b: qb.ncols(),
        rank_union: rank(&hstack(a, b)),
        residual: dist(&qb, a).max(dist(&qa, b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let k = null_space(&m);
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).amax() < 1e-12);
    }

    #[test]
    fn empty_matrices() {
        assert_eq!(rank(&DMatrix::zeros(0, 3)), 0);
        assert_eq!(null_space(&DMatrix::zeros(0, 2)).ncols(), 2);
        assert_eq!(null_space(&DMatrix::zeros(2, 0)).ncols(), 0);
        assert_eq!(column_basis(&DMatrix::zeros(2, 0)).ncols(), 0);
        let cmp = compare_spans(&DMatrix::zeros(2, 0), &DMatrix::zeros(2, 1));
        assert!(cmp.equal());
    }

    #[test]
    fn tiny_singular_values_are_zero() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-12]);
        assert_eq!(rank(&m), 1);
    }

    fn mat(r: usize, c: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(-3i32..=3, r * c)
            .prop_map(move |v| DMatrix::from_iterator(r, c, v.into_iter().map(f64::from)))
    }

    proptest! {
        #[test]
        fn rank_nullity(m in mat(3, 5)) {
            prop_assert_eq!(rank(&m) + null_space(&m).ncols(), 5);
        }

        #[test]
        fn span_equality_is_symmetric_and_transitive(
            a in mat(4, 2),
            t in mat(2, 2),
            s in mat(2, 2),
        ) {
            let b = &a * &t;
            let c = &b * &s;
            let ab = compare_spans(&a, &b);
            let ba = compare_spans(&b, &a);
            prop_assert_eq!(ab.equal(), ba.equal());
            let bc = compare_spans(&b, &c);
            if ab.equal() && bc.equal() {
                prop_assert!(compare_spans(&a, &c).equal());
            }
            prop_assert!(compare_spans(&b, &a).a_in_b());
        }

        #[test]
        fn intersection_bounds(a in mat(4, 2), b in mat(4, 2)) {
            let d = intersection_dim(&a, &b);
            prop_assert!(d <= rank(&a).min(rank(&b)));
        }
    }
}
