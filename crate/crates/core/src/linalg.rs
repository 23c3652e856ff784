//! Small dense helpers shared by the regression modules.

use nalgebra::{DMatrix, DVector};

/// Ratio of smallest to largest singular value.
pub(crate) fn singular_value_ratio(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0.0;
    }
    sv.min() / max
}

pub(crate) fn condition_number(m: &DMatrix<f64>) -> f64 {
    let ratio = singular_value_ratio(m);
    if ratio == 0.0 {
        f64::INFINITY
    } else {
        1.0 / ratio
    }
}

/// Scales each column to unit Euclidean norm. Zero columns stay zero.
pub(crate) fn equilibrate(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    out
}

/// Indices of columns that load on the numerically null right-singular
/// directions of the column-equilibrated matrix.
pub(crate) fn dependent_columns(x: &DMatrix<f64>, tol: f64) -> Vec<usize> {
    let eq = equilibrate(x);
    let svd = eq.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let max = svd.singular_values.max();
    let mut cols = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol * max {
            for j in 0..x.ncols() {
                if v_t[(k, j)].abs() > 1e-6 && !cols.contains(&j) {
                    cols.push(j);
                }
            }
        }
    }
    cols.sort_unstable();
    cols
}

/// Least-squares solution through a Householder QR, plus the diagonal of
/// `(XᵀX)⁻¹` read off `R⁻¹`. Caller guarantees full column rank.
pub(crate) struct QrSolution {
    pub coef: DVector<f64>,
    pub gram_inverse_diag: DVector<f64>,
}

pub(crate) fn qr_least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> QrSolution {
    let p = x.ncols();
    let qr = x.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let qty = q.transpose() * y;
    let coef = r
        .solve_upper_triangular(&qty)
        .expect("full-rank R is invertible");
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .expect("full-rank R is invertible");
    let gram_inverse_diag = DVector::from_fn(p, |j, _| r_inv.row(j).norm_squared());
    QrSolution {
        coef,
        gram_inverse_diag,
    }
}

/// Residual of `v` after orthogonal projection onto the column space of `x`.
/// An empty `x` leaves `v` unchanged.
pub(crate) fn residualize(x: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    if x.ncols() == 0 {
        return v.clone();
    }
    let sol = qr_least_squares(x, v);
    v - x * sol.coef
}

/// Copies the listed columns of `x` into a new matrix.
pub(crate) fn select_columns(x: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), cols.len(), |i, k| x[(i, cols[k])])
}
