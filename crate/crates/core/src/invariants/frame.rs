use nalgebra::DMatrix;

use super::InvariantError;
use crate::curvature::CurvatureError;
use crate::jet::Jet;
use crate::jetmat;
use crate::linalg;

/// Vector fields dual to the differentials of `n` invariants.
#[derive(Debug, Clone)]
pub struct TresseFrame {
    /// `∂I_i/∂x^j` at the base point.
    pub jacobian: DMatrix<f64>,
    /// `frame[i][m]` is the `m`-th coordinate component of `∇_i`.
    pub frame: Vec<Vec<Jet>>,
    pub condition_number: f64,
}

impl TresseFrame {
    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    /// Jet order of the frame components.
    pub fn order(&self) -> usize {
        self.frame[0][0].order()
    }

    pub fn truncate(&self, order: usize) -> TresseFrame {
        TresseFrame {
            jacobian: self.jacobian.clone(),
            frame: self.frame.iter().map(|v| jetmat::truncate(v, order)).collect(),
            condition_number: self.condition_number,
        }
    }

    /// Constant-term matrix whose columns are the frame vectors.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |m, i| self.frame[i][m].value())
    }
}

/// Builds the frame from `n` invariant jets of order at least 1; the frame
/// jets have one order less.
pub fn tresse_frame(invariants: &[Jet]) -> Result<TresseFrame, InvariantError> {
    let n = invariants.len();
    let order = invariants.iter().map(Jet::order).min().unwrap_or(0);
    if order < 1 {
        return Err(CurvatureError::InsufficientOrder { needed: 1, available: order }.into());
    }
    if invariants.iter().any(|j| j.n_vars() != n) {
        return Err(InvariantError::UnsupportedDimension(n));
    }
    let mut jac = Vec::with_capacity(n * n);
    for inv in invariants {
        for j in 0..n {
            jac.push(inv.truncate(order).derivative(j)?);
        }
    }
    let jacobian = jetmat::values(&jac, n);
    let values: Vec<f64> = invariants.iter().map(Jet::value).collect();
    let scaled = linalg::scale_rows(&values, &jacobian, linalg::DEFAULT_ABS_FLOOR);
    let rank = linalg::numerical_rank(
        &linalg::singular_values(&scaled),
        linalg::DEFAULT_REL_TOL,
        linalg::DEFAULT_ABS_FLOOR,
    );
    if rank < n {
        return Err(InvariantError::SingularFrame { rank, dim: n });
    }
    let inverse = jetmat::invert(&jac, n).ok_or(InvariantError::SingularFrame { rank, dim: n })?;
    let sv = linalg::singular_values(&jacobian);
    let condition_number = sv[0] / sv[n - 1];
    let frame = (0..n).map(|i| (0..n).map(|m| inverse[m * n + i].clone()).collect()).collect();
    Ok(TresseFrame { jacobian, frame, condition_number })
}
