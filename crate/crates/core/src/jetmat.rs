//! Dense square matrices with jet entries, row-major.

use nalgebra::DMatrix;

use crate::jet::Jet;

pub(crate) fn identity(n: usize, n_vars: usize, order: usize) -> Vec<Jet> {
    (0..n * n)
        .map(|k| Jet::constant(n_vars, order, if k / n == k % n { 1.0 } else { 0.0 }))
        .collect()
}

pub(crate) fn mul(a: &[Jet], b: &[Jet], n: usize) -> Vec<Jet> {
    let template = &a[0];
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Jet::zero(template.n_vars(), template.order());
            for k in 0..n {
                acc.add_product(&a[i * n + k], &b[k * n + j]);
            }
            out.push(acc);
        }
    }
    out
}

pub(crate) fn trace(a: &[Jet], n: usize) -> Jet {
    let mut acc = a[0].clone();
    for i in 1..n {
        acc += &a[i * n + i];
    }
    acc
}

/// `Tr(a · b)` without forming the product.
pub(crate) fn trace_of_product(a: &[Jet], b: &[Jet], n: usize) -> Jet {
    let mut acc = Jet::zero(a[0].n_vars(), a[0].order());
    for i in 0..n {
        for k in 0..n {
            acc.add_product(&a[i * n + k], &b[k * n + i]);
        }
    }
    acc
}

pub(crate) fn truncate(a: &[Jet], order: usize) -> Vec<Jet> {
    a.iter().map(|j| j.truncate(order)).collect()
}

/// Constant-term matrix.
pub(crate) fn values(a: &[Jet], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| a[i * n + j].value())
}

/// Gauss–Jordan inverse over the jet ring, pivoting on constant terms.
///
/// Returns `None` when a pivot's constant term vanishes, i.e. the
/// constant-term matrix is singular.
pub(crate) fn invert(a: &[Jet], n: usize) -> Option<Vec<Jet>> {
    let template = &a[0];
    let mut work: Vec<Jet> = a.to_vec();
    let mut inv = identity(n, template.n_vars(), template.order());
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| {
            work[r * n + col].value().abs().total_cmp(&work[s * n + col].value().abs())
        })?;
        if work[pivot * n + col].value() == 0.0 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                work.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
        }
        let scale = work[col * n + col].recip().ok()?;
        for k in 0..n {
            work[col * n + k] = &work[col * n + k] * &scale;
            inv[col * n + k] = &inv[col * n + k] * &scale;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = work[row * n + col].clone();
            if factor.max_abs() == 0.0 {
                continue;
            }
            for k in 0..n {
                let w = &factor * &work[col * n + k];
                work[row * n + k] -= &w;
                let v = &factor * &inv[col * n + k];
                inv[row * n + k] -= &v;
            }
        }
    }
    Some(inv)
}
