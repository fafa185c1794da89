//! Symmetry of a concrete metric from the functional rank of its scalar
//! invariants.
//!
//! At a generic point the invariants restricted to the manifold have
//! functional rank `m`; the isometry orbits then have dimension `n − m`.
//! Rank is read numerically from the Jacobian of the invariants with
//! respect to the coordinates, sampled over a box.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use crate::linalg::{numerical_rank, DEFAULT_ABS_FLOOR, DEFAULT_REL_TOL};

use crate::invariants::{self, FrameStatus, InvariantError, InvariantLabel, InvariantOptions, WeylTraceSet};
use crate::linalg;
use crate::metric::MetricSource;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error("all {0} sample points hit a chart singularity")]
    AllPointsSingular(usize),
    #[error("sampling box has {found} intervals for a {expected}-dimensional metric")]
    BoxDimension { expected: usize, found: usize },
    #[error("at least one sample point is required")]
    NoSamples,
    #[error("maximum invariant order must be at least 2, got {0}")]
    OrderTooLow(usize),
}

impl SymmetryError {
    /// Whether the failure comes from the metric itself rather than the
    /// request.
    pub fn is_domain(&self) -> bool {
        match self {
            SymmetryError::Invariant(e) => e.is_domain(),
            SymmetryError::AllPointsSingular(_) => true,
            _ => false,
        }
    }
}

/// Invariant values and their coordinate gradients at one point.
#[derive(Debug, Clone)]
pub struct InvariantJacobian {
    pub labels: Vec<InvariantLabel>,
    pub values: Vec<f64>,
    /// Rows are invariants, columns coordinates.
    pub gradients: DMatrix<f64>,
    pub frame: FrameStatus,
    /// Largest `|R_{ijkl}|` at the point.
    pub max_abs_riemann: f64,
}

impl InvariantJacobian {
    /// Gradients with each row rescaled by `1 / max(|I|, ‖∇I‖)`.
    pub fn scaled(&self, abs_floor: f64) -> DMatrix<f64> {
        linalg::scale_rows(&self.values, &self.gradients, abs_floor)
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Invariants up to `max_order` with their gradients.
pub fn invariant_jacobian(
    source: &dyn MetricSource,
    point: &[f64],
    max_order: usize,
) -> Result<InvariantJacobian, SymmetryError> {
    jacobian_with(source, point, &InvariantOptions { max_order, with_gradients: true, ..Default::default() })
}

fn jacobian_with(
    source: &dyn MetricSource,
    point: &[f64],
    options: &InvariantOptions,
) -> Result<InvariantJacobian, SymmetryError> {
    if options.max_order < 2 {
        return Err(SymmetryError::OrderTooLow(options.max_order));
    }
    let (vector, curv) = invariants::evaluate(source, point, options)?;
    let curv = curv.expect("curvature is computed for max_order >= 2");
    let gradients = vector.gradients().unwrap_or_else(|| DMatrix::zeros(0, source.dim()));
    Ok(InvariantJacobian {
        values: vector.values_f64(),
        labels: vector.labels,
        gradients,
        frame: vector.frame,
        max_abs_riemann: curv.riemann.max_abs_value(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOptions {
    pub max_order: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub rel_tol: f64,
    pub abs_floor: f64,
    /// Invariants below this are treated as vanishing for the regularity check.
    pub vanish_tol: f64,
    pub a_power_max: usize,
    pub weyl_traces: WeylTraceSet,
}

impl RankOptions {
    pub fn new(seed: u64) -> RankOptions {
        RankOptions {
            max_order: 3,
            n_samples: 20,
            seed,
            rel_tol: DEFAULT_REL_TOL,
            abs_floor: DEFAULT_ABS_FLOOR,
            vanish_tol: 1e-10,
            a_power_max: 1,
            weyl_traces: WeylTraceSet::Independent,
        }
    }

    fn invariant_options(&self) -> InvariantOptions {
        InvariantOptions {
            max_order: self.max_order,
            with_gradients: true,
            a_power_max: self.a_power_max,
            weyl_traces: self.weyl_traces,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleReport {
    pub point: Vec<f64>,
    /// `None` for skipped points.
    pub rank: Option<usize>,
    pub singular_values: Vec<f64>,
    pub invariant_count: usize,
    pub max_abs_invariant: f64,
    pub max_abs_riemann: f64,
    pub frame: Option<FrameStatus>,
    /// Why the point was skipped.
    pub skipped: Option<String>,
}

/// What a homogeneity number licenses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryClaim {
    /// Riemannian signature, or no vanishing-invariant warning: the orbit
    /// dimension is that of the isometry group.
    IsometryOrbits,
    /// Only the level-set dimension of the invariants is known.
    InvariantRankOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub dim: usize,
    pub max_order: usize,
    pub seed: u64,
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub samples: Vec<SampleReport>,
    pub skipped: usize,
    /// Maximum rank over the evaluated points.
    pub consensus_rank: usize,
    /// `dim − consensus_rank`.
    pub homogeneity: usize,
    pub riemannian: bool,
    /// Some point has vanishing invariants but nonzero curvature.
    pub regularity_warning: bool,
    pub claim: SymmetryClaim,
    pub warnings: Vec<String>,
}

/// Deterministic uniform points in `domain`.
pub fn sample_points(domain: &[(f64, f64)], n_samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_samples)
        .map(|_| domain.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>()).collect())
        .collect()
}

fn evaluate_sample(
    source: &dyn MetricSource,
    point: Vec<f64>,
    options: &RankOptions,
) -> Result<(SampleReport, Option<InvariantJacobian>), SymmetryError> {
    match jacobian_with(source, &point, &options.invariant_options()) {
        Ok(jac) => {
            let sv = linalg::singular_values(&jac.scaled(options.abs_floor));
            let rank = numerical_rank(&sv, options.rel_tol, options.abs_floor);
            let report = SampleReport {
                point,
                rank: Some(rank),
                singular_values: sv,
                invariant_count: jac.values.len(),
                max_abs_invariant: jac.max_abs_value(),
                max_abs_riemann: jac.max_abs_riemann,
                frame: Some(jac.frame),
                skipped: None,
            };
            Ok((report, Some(jac)))
        }
        Err(e) if e.is_domain() => {
            let report = SampleReport {
                point,
                rank: None,
                singular_values: Vec::new(),
                invariant_count: 0,
                max_abs_invariant: 0.0,
                max_abs_riemann: 0.0,
                frame: None,
                skipped: Some(e.to_string()),
            };
            Ok((report, None))
        }
        Err(e) => Err(e),
    }
}

fn sample_all(
    source: &dyn MetricSource,
    domain: &[(f64, f64)],
    options: &RankOptions,
) -> Result<Vec<(SampleReport, Option<InvariantJacobian>)>, SymmetryError> {
    let n = source.dim();
    if domain.len() != n {
        return Err(SymmetryError::BoxDimension { expected: n, found: domain.len() });
    }
    if options.n_samples == 0 {
        return Err(SymmetryError::NoSamples);
    }
    if options.max_order < 2 {
        return Err(SymmetryError::OrderTooLow(options.max_order));
    }
    let points = sample_points(domain, options.n_samples, options.seed);
    let results: Vec<_> = points.into_par_iter().map(|p| evaluate_sample(source, p, options)).collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    if results.iter().all(|(r, _)| r.rank.is_none()) {
        return Err(SymmetryError::AllPointsSingular(results.len()));
    }
    Ok(results)
}

/// Functional rank of the invariants over `domain` and the implied
/// dimension of the symmetry orbits.
pub fn homogeneity(
    source: &dyn MetricSource,
    domain: &[(f64, f64)],
    options: &RankOptions,
) -> Result<RankReport, SymmetryError> {
    let n = source.dim();
    let results = sample_all(source, domain, options)?;
    let samples: Vec<SampleReport> = results.into_iter().map(|(r, _)| r).collect();
    let skipped = samples.iter().filter(|s| s.rank.is_none()).count();
    let consensus_rank = samples.iter().filter_map(|s| s.rank).max().unwrap_or(0);
    let regularity_warning = samples
        .iter()
        .any(|s| s.rank.is_some() && s.max_abs_invariant < options.vanish_tol && s.max_abs_riemann > options.vanish_tol);
    let riemannian = source.is_riemannian();
    let mut warnings = Vec::new();
    if skipped > 0 {
        warnings.push(format!("{skipped} of {} sample points skipped at chart singularities", samples.len()));
    }
    if regularity_warning {
        warnings.push(
            "all computed invariants vanish while the curvature does not: the metric lies where invariants fail \
             to separate metrics, so the rank does not determine Killing fields"
                .to_string(),
        );
    }
    let claim = if riemannian || !regularity_warning {
        SymmetryClaim::IsometryOrbits
    } else {
        SymmetryClaim::InvariantRankOnly
    };
    Ok(RankReport {
        dim: n,
        max_order: options.max_order,
        seed: options.seed,
        rel_tol: options.rel_tol,
        abs_floor: options.abs_floor,
        samples,
        skipped,
        consensus_rank,
        homogeneity: n - consensus_rank.min(n),
        riemannian,
        regularity_warning,
        claim,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityTest {
    pub homogeneous: bool,
    /// `s` such that invariants built from `∇^s R` were tested.
    pub order_bound: usize,
    pub max_order: usize,
    /// Largest scaled gradient norm seen.
    pub max_gradient_norm: f64,
    pub tolerance: f64,
    /// Pseudo-Riemannian input: constancy of invariants is necessary for
    /// local homogeneity but not sufficient.
    pub necessary_only: bool,
    pub samples_used: usize,
}

/// Default derivative bound `min(C(n,2), cap)`.
pub fn default_order_bound(n: usize, cap: usize) -> usize {
    (n * (n - 1) / 2).min(cap)
}

/// Local homogeneity test: every invariant built from `∇^s R`,
/// `s ≤ order_bound`, has (scaled) gradient norm at most `tol` on every
/// sample point.
pub fn homogeneous_test(
    source: &dyn MetricSource,
    domain: &[(f64, f64)],
    order_bound: usize,
    tol: f64,
    options: &RankOptions,
) -> Result<HomogeneityTest, SymmetryError> {
    let max_order = order_bound + 2;
    let options = RankOptions { max_order, ..*options };
    let results = sample_all(source, domain, &options)?;
    let mut max_gradient_norm: f64 = 0.0;
    let mut used = 0;
    for jac in results.iter().filter_map(|(_, j)| j.as_ref()) {
        used += 1;
        let scaled = jac.scaled(options.abs_floor);
        for r in 0..scaled.nrows() {
            max_gradient_norm = max_gradient_norm.max(scaled.row(r).norm());
        }
    }
    Ok(HomogeneityTest {
        homogeneous: max_gradient_norm <= tol,
        order_bound,
        max_order,
        max_gradient_norm,
        tolerance: tol,
        necessary_only: !source.is_riemannian(),
        samples_used: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::parse_metric;

    const SPHERE: &str = "dim=2; coords=[x,y]; g[1,1]=1; g[2,2]=sin(x)^2";
    const REVOLUTION: &str = "dim=2; coords=[x,y]; g[1,1]=1; g[2,2]=(2+sin(x))^2";
    const PP_WAVE: &str = "dim=4; coords=[u,v,x,y]; signature=[-1,1,1,1]
        g[1,1]=(x^2-y^2)*exp(u)+x*y*u; g[1,2]=1; g[2,2]=0; g[3,3]=1; g[4,4]=1";

    #[test]
    fn jacobian_examples() {
        let sphere = parse_metric(SPHERE).unwrap();
        let j = invariant_jacobian(&sphere, &[1.0, 0.3], 2).unwrap();
        assert!(j.gradients.iter().all(|g| g.abs() < 1e-12));
        let rev = parse_metric(REVOLUTION).unwrap();
        let j = invariant_jacobian(&rev, &[1.0, 0.3], 3).unwrap();
        assert_eq!(j.gradients.nrows(), 2);
        for r in 0..2 {
            assert!(j.gradients[(r, 0)].abs() > 1e-3);
            assert!(j.gradients[(r, 1)].abs() < 1e-12);
        }
        let x: f64 = 1.0;
        let dk = 2.0 * x.cos() / (2.0 + x.sin()).powi(2);
        assert!((j.gradients[(0, 0)] - 2.0 * dk).abs() < 1e-12);
        let flat = parse_metric("dim=2; coords=[x,y]; g[1,1]=1; g[2,2]=1").unwrap();
        let j = invariant_jacobian(&flat, &[0.0, 0.0], 3).unwrap();
        assert!(j.gradients.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_points(&[(0.5, 2.5), (-1.0, 1.0)], 5, 7);
        let b = sample_points(&[(0.5, 2.5), (-1.0, 1.0)], 5, 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|p| (0.5..=2.5).contains(&p[0]) && (-1.0..=1.0).contains(&p[1])));
        assert_ne!(a, sample_points(&[(0.5, 2.5), (-1.0, 1.0)], 5, 8));
    }

    #[test]
    fn sphere_and_revolution() {
        let opts = RankOptions::new(11);
        let sphere = parse_metric(SPHERE).unwrap();
        let r = homogeneity(&sphere, &[(0.5, 2.5), (-1.0, 1.0)], &opts).unwrap();
        assert_eq!((r.consensus_rank, r.homogeneity), (0, 2));
        assert!(!r.regularity_warning);
        assert_eq!(r.claim, SymmetryClaim::IsometryOrbits);
        let rev = parse_metric(REVOLUTION).unwrap();
        let r = homogeneity(&rev, &[(0.0, 3.0), (-1.0, 1.0)], &opts).unwrap();
        assert_eq!((r.consensus_rank, r.homogeneity), (1, 1));
    }

    #[test]
    fn singular_points_are_skipped() {
        let sphere = parse_metric(SPHERE).unwrap();
        let opts = RankOptions { n_samples: 4, ..RankOptions::new(1) };
        let err = homogeneity(&sphere, &[(0.0, 0.0), (-1.0, 1.0)], &opts).unwrap_err();
        assert_eq!(err, SymmetryError::AllPointsSingular(4));
        assert!(err.is_domain());
        let bad = homogeneity(&sphere, &[(0.5, 1.0)], &opts).unwrap_err();
        assert_eq!(bad, SymmetryError::BoxDimension { expected: 2, found: 1 });
    }

    #[test]
    fn pp_wave_carries_the_warning() {
        let pp = parse_metric(PP_WAVE).unwrap();
        let opts = RankOptions { n_samples: 5, ..RankOptions::new(3) };
        let r = homogeneity(&pp, &[(-1.0, 1.0); 4], &opts).unwrap();
        assert!(r.regularity_warning);
        assert_eq!(r.claim, SymmetryClaim::InvariantRankOnly);
        assert_eq!(r.consensus_rank, 0);
        assert!(!r.riemannian);
    }

    #[test]
    fn homogeneity_test_examples() {
        let opts = RankOptions { n_samples: 6, ..RankOptions::new(5) };
        let bound = default_order_bound(2, 1);
        assert_eq!(bound, 1);
        let sphere = parse_metric(SPHERE).unwrap();
        let t = homogeneous_test(&sphere, &[(0.5, 2.5), (-1.0, 1.0)], bound, 1e-8, &opts).unwrap();
        assert!(t.homogeneous && !t.necessary_only);
        let hyp = parse_metric("dim=2; coords=[x,y]; g[1,1]=1/y^2; g[2,2]=1/y^2").unwrap();
        assert!(homogeneous_test(&hyp, &[(-1.0, 1.0), (0.5, 2.0)], bound, 1e-8, &opts).unwrap().homogeneous);
        let rev = parse_metric(REVOLUTION).unwrap();
        assert!(!homogeneous_test(&rev, &[(0.0, 3.0), (-1.0, 1.0)], bound, 1e-8, &opts).unwrap().homogeneous);
    }
}
