use nalgebra::{DMatrix, DVector};

/// Relative threshold on the diagonal of R below which a column is treated as
/// linearly dependent.
const RANK_TOL: f64 = 1e-12;

/// Least-squares solution of `design * x ≈ rhs` via Householder QR.
///
/// Returns `None` when the design is rank deficient.
pub(crate) fn qr_least_squares(design: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let (m, n) = design.shape();
    if m < n || n == 0 {
        return None;
    }
    let qr = design.clone().qr();
    let r = qr.r();
    let max_diag = (0..n).map(|i| r[(i, i)].abs()).fold(0.0_f64, f64::max);
    if max_diag == 0.0 || (0..n).any(|i| r[(i, i)].abs() <= RANK_TOL * max_diag) {
        return None;
    }
    let qty = qr.q().transpose() * rhs;
    r.solve_upper_triangular(&qty)
}

/// Weighted least squares: rows are scaled by `sqrt(w)` before the QR solve.
pub(crate) fn weighted_least_squares(
    design: &DMatrix<f64>,
    rhs: &DVector<f64>,
    weights: &[f64],
) -> Option<DVector<f64>> {
    let mut a = design.clone();
    let mut b = rhs.clone();
    for (i, w) in weights.iter().enumerate() {
        let s = w.sqrt();
        a.row_mut(i).scale_mut(s);
        b[i] *= s;
    }
    qr_least_squares(&a, &b)
}
