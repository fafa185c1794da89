//! Numerical rank of gradient matrices.

use nalgebra::DMatrix;

/// Default relative singular-value cutoff.
pub const DEFAULT_REL_TOL: f64 = 1e-8;
/// Default absolute floor below which a matrix counts as zero.
pub const DEFAULT_ABS_FLOOR: f64 = 1e-10;

/// Number of singular values above `rel_tol · σ₁`, or 0 when `σ₁` itself
/// is below `abs_floor`. Input must be sorted in descending order.
pub fn numerical_rank(singular_values: &[f64], rel_tol: f64, abs_floor: f64) -> usize {
    let Some(&largest) = singular_values.first() else {
        return 0;
    };
    if !(largest >= abs_floor) {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > rel_tol * largest).count()
}

/// Descending singular values.
pub(crate) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Rescales each gradient row by `1 / max(|value|, ‖gradient‖)` so that
/// invariants of wildly different magnitudes weigh alike. Rows whose value
/// and gradient are both below `abs_floor` are zeroed.
pub(crate) fn scale_rows(values: &[f64], gradients: &DMatrix<f64>, abs_floor: f64) -> DMatrix<f64> {
    let mut out = gradients.clone();
    for (r, &v) in values.iter().enumerate() {
        let norm = gradients.row(r).norm();
        let size = v.abs().max(norm);
        let factor = if size > abs_floor { 1.0 / size } else { 0.0 };
        out.row_mut(r).scale_mut(factor);
    }
    out
}
