//! Scalar differential invariants of pseudo-Riemannian metrics.
//!
//! The crate is organized bottom-up:
//!
//! - [`jet`]: truncated multivariate Taylor arithmetic, the numeric substrate
//!   for every derivative taken below;
//! - [`metric`]: metric definition files and expression evaluation on jets;
//! - [`curvature`]: Levi-Civita connection, Riemann/Ricci/Weyl tensors and
//!   iterated covariant derivatives of the curvature;
//! - [`invariants`]: Ricci operator traces, Weyl operator traces, the Tresse
//!   frame and higher-order contracted invariants;
//! - [`counting`]: exact invariant counts and Poincaré generating functions;
//! - [`symmetry`]: functional rank of the restricted invariant algebra and
//!   the resulting isometry orbit dimension.

pub mod counting;
pub mod curvature;
pub mod invariants;
pub mod jet;
mod jetmat;
mod linalg;
pub mod metric;
pub mod symmetry;

pub use counting::{delta_count, poincare, s_count, CountingError, RationalFunction};
pub use curvature::{CurvatureError, CurvaturePoint, Tensor, Variance};
pub use invariants::{invariant_vector, InvariantError, InvariantLabel, InvariantOptions, InvariantVector};
pub use jet::{ElementaryFn, Jet, JetError, RationalExponent};
pub use metric::{parse_metric, Expr, MetricSource, MetricSpec, ParseError};
pub use symmetry::{homogeneity, RankOptions, RankReport, SymmetryError};
