//! Scalar differential invariants of a metric at a point.
//!
//! Order 2 consists of the traces `I_i = Tr(A^i)` of the Ricci operator and,
//! for `n ≥ 4`, traces of compositions of the Weyl operator with the induced
//! action of `A` on bivectors. Higher orders contract `∇^{k−2}R` against the
//! Tresse frame dual to `dI_1, …, dI_n`.
//!
//! In dimension 2 the Ricci operator is `(scal/2)·Id`, so its traces carry a
//! single function. There the invariants are the scalar curvature (order 2)
//! and `|∇ scal|²` (order 3), and the frame is built from that pair.

mod frame;
mod higher;
mod weyl;

use std::fmt;

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};
use thiserror::Error;

pub use frame::{tresse_frame, TresseFrame};
pub use higher::{higher_invariants, HigherIndex};
pub use weyl::{
    exterior_square, independent_weyl_traces, weyl_invariant_count, weyl_operator, weyl_trace_family, weyl_traces,
    WeylIndex, WeylTraceSet,
};

use crate::curvature::{CurvatureError, CurvaturePoint, Tensor};
use crate::jet::{Jet, JetError};
use crate::jetmat;
use crate::metric::MetricSource;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvariantError {
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error("Tresse frame is singular: invariant differentials have rank {rank} < {dim}")]
    SingularFrame { rank: usize, dim: usize },
    #[error("operation is undefined in dimension {0}")]
    UnsupportedDimension(usize),
    #[error("A-power range {requested} exceeds the dimension {dim}")]
    PowerRange { requested: usize, dim: usize },
}

impl From<JetError> for InvariantError {
    fn from(e: JetError) -> Self {
        InvariantError::Curvature(e.into())
    }
}

impl InvariantError {
    pub fn is_domain(&self) -> bool {
        matches!(self, InvariantError::Curvature(e) if e.is_domain())
    }
}

/// `Tr(A^i)` for `i = 1..=n`.
pub fn ricci_traces(a: &Tensor) -> Vec<Jet> {
    let n = a.dim();
    let a = a.entries();
    let mut out = Vec::with_capacity(n);
    out.push(jetmat::trace(a, n));
    let mut power = a.to_vec();
    for _ in 1..n {
        out.push(jetmat::trace_of_product(&power, a, n));
        if out.len() < n {
            power = jetmat::mul(&power, a, n);
        }
    }
    out
}

/// `g^{ij} ∂_i f ∂_j f`, one jet order below `f`.
pub fn gradient_norm(f: &Jet, g_inv: &Tensor) -> Result<Jet, InvariantError> {
    let n = g_inv.dim();
    let partials = (0..n).map(|i| f.derivative(i)).collect::<Result<Vec<_>, _>>()?;
    let order = partials[0].order();
    let inv = g_inv.truncate(order);
    let mut acc = Jet::zero(f.n_vars(), order);
    for i in 0..n {
        for j in 0..n {
            let term = inv.get(&[i, j]) * &partials[i];
            acc.add_product(&term, &partials[j]);
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InvariantLabel {
    /// `Tr(A^i)`, 1-based; in dimension 2 only `I1`, the scalar curvature.
    RicciTrace(usize),
    /// `|∇ scal|²`, the second invariant in dimension 2.
    ScalarGradientNorm,
    Weyl(WeylIndex),
    Higher(HigherIndex),
}

impl InvariantLabel {
    /// Differential order of the invariant.
    pub fn order(&self) -> usize {
        match self {
            InvariantLabel::RicciTrace(_) | InvariantLabel::Weyl(_) => 2,
            InvariantLabel::ScalarGradientNorm => 3,
            InvariantLabel::Higher(h) => h.order(),
        }
    }
}

impl fmt::Display for InvariantLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvariantLabel::RicciTrace(i) => write!(f, "I{i}"),
            InvariantLabel::ScalarGradientNorm => write!(f, "I2'"),
            InvariantLabel::Weyl(w) => w.fmt(f),
            InvariantLabel::Higher(h) => h.fmt(f),
        }
    }
}

impl Serialize for InvariantLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantOptions {
    /// Highest differential order `k` to include.
    pub max_order: usize,
    /// Carry first derivatives of every invariant.
    pub with_gradients: bool,
    /// Largest power of `A` applied to curvature slots in higher invariants.
    pub a_power_max: usize,
    pub weyl_traces: WeylTraceSet,
}

impl Default for InvariantOptions {
    fn default() -> Self {
        InvariantOptions { max_order: 2, with_gradients: false, a_power_max: 1, weyl_traces: WeylTraceSet::Independent }
    }
}

/// Whether higher-order invariants could be generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FrameStatus {
    /// `max_order` is too low to need a frame.
    NotRequired,
    Regular { condition_number: f64 },
    /// The higher blocks were skipped.
    Singular { rank: usize },
}

#[derive(Debug, Clone)]
pub struct InvariantVector {
    pub labels: Vec<InvariantLabel>,
    /// Jets of order 1 with gradients, 0 otherwise.
    pub values: Vec<Jet>,
    pub max_order: usize,
    pub frame: FrameStatus,
}

impl InvariantVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(Jet::value).collect()
    }

    pub fn get(&self, label: &InvariantLabel) -> Option<&Jet> {
        self.labels.iter().position(|l| l == label).map(|i| &self.values[i])
    }

    /// Rows are invariants, columns coordinates; `None` without gradients.
    pub fn gradients(&self) -> Option<DMatrix<f64>> {
        let first = self.values.first()?;
        if first.order() == 0 {
            return None;
        }
        let n = first.n_vars();
        let mut m = DMatrix::zeros(self.values.len(), n);
        for (r, v) in self.values.iter().enumerate() {
            let g = v.gradient().ok()?;
            for c in 0..n {
                m[(r, c)] = g[c];
            }
        }
        Some(m)
    }
}

/// Lowest order at which frame-contracted invariants appear.
pub fn first_higher_order(n: usize) -> usize {
    if n == 2 {
        4
    } else {
        3
    }
}

/// Every invariant up to `options.max_order` at `point`.
///
/// A singular Tresse frame is not an error: the order-2 (and, in dimension
/// 2, order-3) blocks are returned and [`InvariantVector::frame`] records
/// the rank.
pub fn invariant_vector(
    source: &dyn MetricSource,
    point: &[f64],
    options: &InvariantOptions,
) -> Result<InvariantVector, InvariantError> {
    evaluate(source, point, options).map(|(v, _)| v)
}

/// [`invariant_vector`] together with the curvature it was built from
/// (`None` when `max_order < 2`).
pub(crate) fn evaluate(
    source: &dyn MetricSource,
    point: &[f64],
    options: &InvariantOptions,
) -> Result<(InvariantVector, Option<CurvaturePoint>), InvariantError> {
    let n = source.dim();
    let k = options.max_order;
    if options.a_power_max > n {
        return Err(InvariantError::PowerRange { requested: options.a_power_max, dim: n });
    }
    let out = usize::from(options.with_gradients);
    if k < 2 {
        let empty = InvariantVector { labels: Vec::new(), values: Vec::new(), max_order: k, frame: FrameStatus::NotRequired };
        return Ok((empty, None));
    }
    let higher_start = first_higher_order(n);
    let derivatives = if k >= higher_start { k - 2 } else { 0 };
    let curv = CurvaturePoint::compute(source, point, k + out, derivatives)?;
    let needs_frame = k >= higher_start;
    let frame_order = if needs_frame { out + 1 } else { out };

    let mut labels = Vec::new();
    let mut values = Vec::new();
    let frame_inputs: Vec<Jet>;
    if n == 2 {
        labels.push(InvariantLabel::RicciTrace(1));
        values.push(curv.scalar.truncate(out));
        if k >= 3 {
            let norm = gradient_norm(&curv.scalar, &curv.inverse)?;
            labels.push(InvariantLabel::ScalarGradientNorm);
            values.push(norm.truncate(out));
            frame_inputs = vec![curv.scalar.truncate(frame_order), norm.truncate(frame_order.min(norm.order()))];
        } else {
            frame_inputs = Vec::new();
        }
    } else {
        let a = curv.ricci_operator.truncate(frame_order);
        let traces = ricci_traces(&a);
        for (i, t) in traces.iter().enumerate() {
            labels.push(InvariantLabel::RicciTrace(i + 1));
            values.push(t.truncate(out));
        }
        let w = curv.weyl.as_ref().map(|w| w.truncate(out));
        for (index, value) in weyl_traces(&curv.ricci_operator.truncate(out), w.as_ref(), &curv.inverse, options.weyl_traces)? {
            labels.push(InvariantLabel::Weyl(index));
            values.push(value);
        }
        frame_inputs = traces;
    }

    let mut frame_status = FrameStatus::NotRequired;
    if needs_frame {
        match tresse_frame(&frame_inputs) {
            Ok(frame) => {
                frame_status = FrameStatus::Regular { condition_number: frame.condition_number };
                for order in higher_start..=k {
                    for (index, value) in higher_invariants(&curv, &frame, order, options.a_power_max)? {
                        labels.push(InvariantLabel::Higher(index));
                        values.push(value.truncate(out));
                    }
                }
            }
            Err(InvariantError::SingularFrame { rank, .. }) => frame_status = FrameStatus::Singular { rank },
            Err(e) => return Err(e),
        }
    }
    Ok((InvariantVector { labels, values, max_order: k, frame: frame_status }, Some(curv)))
}

#[cfg(test)]
mod tests;
