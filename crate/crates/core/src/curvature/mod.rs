//! Levi-Civita curvature at a point, computed on jets.
//!
//! Conventions:
//!
//! - `Γ^k_{ij} = ½ g^{kl}(∂_i g_{lj} + ∂_j g_{li} − ∂_l g_{ij})`
//! - `R^i_{jkl} = ∂_k Γ^i_{lj} − ∂_l Γ^i_{kj} + Γ^i_{km}Γ^m_{lj} − Γ^i_{lm}Γ^m_{kj}`
//! - `R_{ijkl} = g_{im} R^m_{jkl}`, `Ric_{jl} = R^i_{jil}`, `scal = g^{jl} Ric_{jl}`
//!
//! so round spheres have positive scalar curvature. Every derivative costs
//! one jet order: metric jets of order `K` give `Γ` of order `K − 1`,
//! curvature of order `K − 2` and `∇^s R` of order `K − 2 − s`.

mod tensor;

use thiserror::Error;

pub use tensor::{Tensor, Variance};

use crate::jet::{Jet, JetError};
use crate::jetmat;
use crate::metric::MetricSource;

use Variance::{Down, Up};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("metric is singular at this point: |det g| = {det:e} below threshold {threshold:e}")]
    SingularMetric { det: f64, threshold: f64 },
    #[error("insufficient jet order: need {needed}, have {available}")]
    InsufficientOrder { needed: usize, available: usize },
    #[error("operation is undefined in dimension {0}")]
    UnsupportedDimension(usize),
}

impl CurvatureError {
    /// Whether the error reflects the metric or its chart at this point,
    /// as opposed to a misuse of the API.
    pub fn is_domain(&self) -> bool {
        matches!(self, CurvatureError::SingularMetric { .. } | CurvatureError::Jet(JetError::Domain { .. }))
    }
}

fn require_order(t: &Tensor, needed: usize) -> Result<(), CurvatureError> {
    if t.order() < needed {
        Err(CurvatureError::InsufficientOrder { needed, available: t.order() })
    } else {
        Ok(())
    }
}

/// Relative threshold on `|det g|` below which the metric is singular.
pub const SINGULAR_METRIC_RTOL: f64 = 1e-10;

/// Metric jets and their inverse at `point`.
pub fn metric_at(source: &dyn MetricSource, point: &[f64], order: usize) -> Result<(Tensor, Tensor), CurvatureError> {
    let n = source.dim();
    let components = source.component_jets(point, order)?;
    let values = jetmat::values(&components, n);
    let det = values.determinant();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = SINGULAR_METRIC_RTOL * scale.powi(n as i32);
    if !(det.abs() >= threshold) || scale == 0.0 {
        return Err(CurvatureError::SingularMetric { det, threshold });
    }
    let inverse = jetmat::invert(&components, n).ok_or(CurvatureError::SingularMetric { det, threshold })?;
    Ok((
        Tensor::from_entries(n, vec![Down, Down], components),
        Tensor::from_entries(n, vec![Up, Up], inverse),
    ))
}

/// Christoffel symbols `Γ^k_{ij}`, indexed `[k, i, j]`.
pub fn christoffel(g: &Tensor, g_inv: &Tensor) -> Result<Tensor, CurvatureError> {
    require_order(g, 1)?;
    let n = g.dim();
    let order = g.order() - 1;
    let mut dg = Vec::with_capacity(n * n * n);
    for m in 0..n {
        for e in g.entries() {
            dg.push(e.derivative(m)?);
        }
    }
    let d = |m: usize, i: usize, j: usize| &dg[(m * n + i) * n + j];
    let inv = g_inv.truncate(order);
    let mut first_kind = Vec::with_capacity(n * n * n);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                let sum = &(d(i, l, j) + d(j, l, i)) - d(l, i, j);
                first_kind.push(sum.scale(0.5));
            }
        }
    }
    Ok(Tensor::from_fn(n, vec![Up, Down, Down], |idx| {
        let (k, i, j) = (idx[0], idx[1], idx[2]);
        let mut acc = Jet::zero(g.entries()[0].n_vars(), order);
        for l in 0..n {
            acc.add_product(inv.get(&[k, l]), &first_kind[(l * n + i) * n + j]);
        }
        acc
    }))
}

/// Riemann tensor, all-lower `R_{ijkl}` and mixed `R^i_{jkl}`.
pub fn riemann(gamma: &Tensor, g: &Tensor) -> Result<(Tensor, Tensor), CurvatureError> {
    require_order(gamma, 1)?;
    let n = gamma.dim();
    let order = gamma.order() - 1;
    let mut dgamma = Vec::with_capacity(n.pow(4));
    for m in 0..n {
        for e in gamma.entries() {
            dgamma.push(e.derivative(m)?);
        }
    }
    let dg = |m: usize, i: usize, a: usize, b: usize| &dgamma[((m * n + i) * n + a) * n + b];
    let gam = gamma.truncate(order);
    let mixed = Tensor::from_fn(n, vec![Up, Down, Down, Down], |idx| {
        let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
        let mut acc = dg(k, i, l, j) - dg(l, i, k, j);
        for m in 0..n {
            acc.add_product(gam.get(&[i, k, m]), gam.get(&[m, l, j]));
            let neg = -gam.get(&[i, l, m]);
            acc.add_product(&neg, gam.get(&[m, k, j]));
        }
        acc
    });
    let lower = lower_first(&mixed, &g.truncate(order));
    Ok((lower, mixed))
}

fn lower_first(mixed: &Tensor, g: &Tensor) -> Tensor {
    let n = mixed.dim();
    let template = &mixed.entries()[0];
    let mut variance = mixed.variance().to_vec();
    variance[0] = Down;
    let mut rest = vec![0; mixed.rank()];
    Tensor::from_fn(n, variance, |idx| {
        let mut acc = Jet::zero(template.n_vars(), template.order());
        rest.copy_from_slice(idx);
        for m in 0..n {
            rest[0] = m;
            acc.add_product(g.get(&[idx[0], m]), mixed.get(&rest));
        }
        acc
    })
}

/// Ricci tensor `Ric_{jl} = R^i_{jil}` and scalar curvature.
pub fn ricci(riemann_mixed: &Tensor, g_inv: &Tensor) -> (Tensor, Jet) {
    let n = riemann_mixed.dim();
    let order = riemann_mixed.order();
    let ric = Tensor::from_fn(n, vec![Down, Down], |idx| {
        let mut acc = riemann_mixed.get(&[0, idx[0], 0, idx[1]]).clone();
        for i in 1..n {
            acc += riemann_mixed.get(&[i, idx[0], i, idx[1]]);
        }
        acc
    });
    let inv = g_inv.truncate(order);
    let mut scal = Jet::zero(ric.entries()[0].n_vars(), order);
    for (a, b) in inv.entries().iter().zip(ric.entries()) {
        scal.add_product(a, b);
    }
    (ric, scal)
}

/// Ricci operator `A^i_j = g^{ik} Ric_{kj}`.
pub fn ricci_operator(g_inv: &Tensor, ric: &Tensor) -> Tensor {
    let n = ric.dim();
    let inv = g_inv.truncate(ric.order());
    Tensor::from_entries(n, vec![Up, Down], jetmat::mul(inv.entries(), ric.entries(), n))
}

/// Weyl tensor, all-lower, defined for `n ≥ 3`.
pub fn weyl(g: &Tensor, ric: &Tensor, scal: &Jet, riemann_lower: &Tensor) -> Result<Tensor, CurvatureError> {
    let n = g.dim();
    if n < 3 {
        return Err(CurvatureError::UnsupportedDimension(n));
    }
    let order = riemann_lower.order();
    let g = g.truncate(order);
    let ric = ric.truncate(order);
    let scal = scal.truncate(order);
    let c1 = 1.0 / (n as f64 - 2.0);
    let c2 = 1.0 / ((n as f64 - 1.0) * (n as f64 - 2.0));
    Ok(Tensor::from_fn(n, vec![Down; 4], |idx| {
        let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
        let gg = |a: usize, b: usize| g.get(&[a, b]);
        let rc = |a: usize, b: usize| ric.get(&[a, b]);
        let mut kn = gg(i, k) * rc(j, l);
        kn -= &(gg(i, l) * rc(j, k));
        kn += &(gg(j, l) * rc(i, k));
        kn -= &(gg(j, k) * rc(i, l));
        let mut gg2 = gg(i, k) * gg(j, l);
        gg2 -= &(gg(i, l) * gg(j, k));
        let mut w = riemann_lower.get(idx) - &kn.scale(c1);
        w += &(&gg2 * &scal).scale(c2);
        w
    }))
}

/// Covariant derivative; the new covariant slot is prepended.
pub fn covariant_derivative(t: &Tensor, gamma: &Tensor) -> Result<Tensor, CurvatureError> {
    require_order(t, 1)?;
    let n = t.dim();
    let order = t.order() - 1;
    if gamma.order() < order {
        return Err(CurvatureError::InsufficientOrder { needed: order, available: gamma.order() });
    }
    let gam = gamma.truncate(order);
    let base = t.truncate(order);
    let mut variance = vec![Down];
    variance.extend_from_slice(t.variance());
    let rank = t.rank();
    let mut inner = vec![0; rank];
    let mut result_err = None;
    let out = Tensor::from_fn(n, variance, |idx| {
        let m = idx[0];
        let a = &idx[1..];
        let mut acc = match t.get(a).derivative(m) {
            Ok(d) => d,
            Err(e) => {
                result_err = Some(e);
                return Jet::zero(n, order);
            }
        };
        for slot in 0..rank {
            inner.copy_from_slice(a);
            for p in 0..n {
                inner[slot] = p;
                match t.variance()[slot] {
                    Down => {
                        let neg = -gam.get(&[p, m, a[slot]]);
                        acc.add_product(&neg, base.get(&inner));
                    }
                    Up => acc.add_product(gam.get(&[a[slot], m, p]), base.get(&inner)),
                }
            }
        }
        acc
    });
    match result_err {
        Some(e) => Err(e.into()),
        None => Ok(out),
    }
}

/// The full curvature pipeline evaluated at one point.
#[derive(Debug, Clone)]
pub struct CurvaturePoint {
    pub point: Vec<f64>,
    /// Jet order of the metric components.
    pub order: usize,
    pub metric: Tensor,
    pub inverse: Tensor,
    pub christoffel: Tensor,
    /// `R_{ijkl}`.
    pub riemann: Tensor,
    /// `R^i_{jkl}`.
    pub riemann_mixed: Tensor,
    pub ricci: Tensor,
    pub scalar: Jet,
    /// `A = g^{-1} Ric`.
    pub ricci_operator: Tensor,
    /// `None` in dimension 2.
    pub weyl: Option<Tensor>,
    /// `∇^s R` for `s = 0..=derivatives`; entry 0 is `R_{ijkl}` itself.
    pub derivatives: Vec<Tensor>,
}

impl CurvaturePoint {
    /// Runs the pipeline from metric jets of order `order`, including
    /// `derivatives` covariant derivatives of the curvature.
    pub fn compute(
        source: &dyn MetricSource,
        point: &[f64],
        order: usize,
        derivatives: usize,
    ) -> Result<CurvaturePoint, CurvatureError> {
        if order < 2 + derivatives {
            return Err(CurvatureError::InsufficientOrder { needed: 2 + derivatives, available: order });
        }
        let (metric, inverse) = metric_at(source, point, order)?;
        let christoffel = christoffel(&metric, &inverse)?;
        let (riemann, riemann_mixed) = riemann(&christoffel, &metric)?;
        let (ricci, scalar) = ricci(&riemann_mixed, &inverse);
        let ricci_operator = ricci_operator(&inverse, &ricci);
        let weyl = if source.dim() >= 3 { Some(weyl(&metric, &ricci, &scalar, &riemann)?) } else { None };
        let mut nabla = vec![riemann.clone()];
        for _ in 0..derivatives {
            let next = covariant_derivative(nabla.last().expect("nonempty"), &christoffel)?;
            nabla.push(next);
        }
        Ok(CurvaturePoint {
            point: point.to_vec(),
            order,
            metric,
            inverse,
            christoffel,
            riemann,
            riemann_mixed,
            ricci,
            scalar,
            ricci_operator,
            weyl,
            derivatives: nabla,
        })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// `R_{abcd} R^{abcd}` at the base point.
    pub fn kretschmann(&self) -> f64 {
        let n = self.dim();
        let inv = self.inverse.values();
        let r = self.riemann.values();
        // raise all four slots one at a time
        let mut up = r.clone();
        for slot in 0..4 {
            let stride = n.pow(3 - slot as u32);
            let mut next = vec![0.0; up.len()];
            for (flat, out) in next.iter_mut().enumerate() {
                let i = (flat / stride) % n;
                let base = flat - i * stride;
                *out = (0..n).map(|m| inv[i * n + m] * up[base + m * stride]).sum();
            }
            up = next;
        }
        r.iter().zip(&up).map(|(a, b)| a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::parse_metric;

    fn curvature(text: &str, point: &[f64], order: usize, derivs: usize) -> CurvaturePoint {
        CurvaturePoint::compute(&parse_metric(text).unwrap(), point, order, derivs).unwrap()
    }

    const SPHERE: &str = "dim=2; coords=[x,y]; g[1,1]=1; g[2,2]=sin(x)^2";
    const HYPERBOLIC: &str = "dim=2; coords=[x,y]; g[1,1]=1/y^2; g[2,2]=1/y^2";

    #[test]
    fn euclidean_is_flat() {
        let c = curvature("dim=3; coords=[x,y,z]; g[1,1]=1; g[2,2]=1; g[3,3]=1", &[0.1, 0.2, 0.3], 3, 1);
        assert_eq!(c.inverse.values(), vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(c.christoffel.max_abs_value(), 0.0);
        assert_eq!(c.riemann.max_abs_value(), 0.0);
        assert_eq!(c.ricci.max_abs_value(), 0.0);
        assert_eq!(c.scalar.value(), 0.0);
        assert_eq!(c.ricci_operator.max_abs_value(), 0.0);
        assert_eq!(c.derivatives[1].max_abs_value(), 0.0);
    }

    #[test]
    fn sphere_inverse_at_equator() {
        let spec = parse_metric(SPHERE).unwrap();
        let (g, inv) = metric_at(&spec, &[std::f64::consts::FRAC_PI_2, 0.0], 2).unwrap();
        assert_eq!(g.values(), vec![1.0, 0.0, 0.0, 1.0]);
        // 1/sin²x at π/2 + t: 1 + t² + ...
        let g22inv = inv.get(&[1, 1]);
        assert!((g22inv.value() - 1.0).abs() < 1e-15);
        assert!(g22inv.coeff(&[1, 0]).unwrap().abs() < 1e-15);
        assert!((g22inv.coeff(&[2, 0]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_point_is_singular() {
        let spec = parse_metric("dim=2; coords=[x,y]; g[1,1]=x; g[2,2]=1").unwrap();
        assert!(matches!(metric_at(&spec, &[0.0, 1.0], 2), Err(CurvatureError::SingularMetric { .. })));
        let sphere = parse_metric(SPHERE).unwrap();
        let err = CurvaturePoint::compute(&sphere, &[0.0, 0.0], 2, 0).unwrap_err();
        assert!(err.is_domain());
    }

    #[test]
    fn sphere_christoffel_and_curvature() {
        for x in [0.4, 1.0, 2.2] {
            let c = curvature(SPHERE, &[x, 0.3], 3, 1);
            let (s, co) = x.sin_cos();
            assert!((c.christoffel.value(&[0, 1, 1]) + s * co).abs() < 1e-14);
            assert!((c.christoffel.value(&[1, 0, 1]) - co / s).abs() < 1e-14);
            assert!((c.christoffel.value(&[1, 1, 0]) - co / s).abs() < 1e-14);
            assert!((c.riemann.value(&[0, 1, 0, 1]) - s * s).abs() < 1e-13);
            assert!((c.scalar.value() - 2.0).abs() < 1e-12);
            assert!(c.derivatives[1].max_abs_value() < 1e-9);
        }
    }

    #[test]
    fn hyperbolic_christoffel_and_curvature() {
        for y in [0.5, 1.0, 1.7] {
            let c = curvature(HYPERBOLIC, &[0.2, y], 3, 1);
            assert!((c.christoffel.value(&[0, 0, 1]) + 1.0 / y).abs() < 1e-13);
            assert!((c.christoffel.value(&[1, 0, 0]) - 1.0 / y).abs() < 1e-13);
            assert!((c.christoffel.value(&[1, 1, 1]) + 1.0 / y).abs() < 1e-13);
            assert!((c.riemann.value(&[0, 1, 0, 1]) + 1.0 / y.powi(4)).abs() < 1e-11);
            assert!((c.scalar.value() + 2.0).abs() < 1e-12);
            assert!(c.derivatives[1].max_abs_value() < 1e-9);
        }
    }

    #[test]
    fn three_sphere_and_product() {
        let s3 = "dim=3; coords=[a,b,c]; g[1,1]=1; g[2,2]=sin(a)^2; g[3,3]=sin(a)^2*sin(b)^2";
        let c = curvature(s3, &[1.1, 0.7, 0.2], 2, 0);
        let a = c.ricci_operator.values();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 2.0 } else { 0.0 };
                assert!((a[i * 3 + j] - target).abs() < 1e-12);
            }
        }
        assert!(c.weyl.as_ref().unwrap().max_abs_value() < 1e-12);

        let product = "dim=3; coords=[x,y,z]; g[1,1]=1; g[2,2]=sin(x)^2; g[3,3]=1";
        let c = curvature(product, &[0.9, 0.1, 0.4], 2, 0);
        let a = c.ricci_operator.values();
        let expected = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        for (got, want) in a.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn schwarzschild_is_ricci_flat() {
        let text = "dim=4; coords=[t,r,th,ph]; signature=[-1,1,1,1]\n\
            g[1,1]=-(1-2*0.5/r); g[2,2]=1/(1-2*0.5/r); g[3,3]=r^2; g[4,4]=r^2*sin(th)^2";
        let r = 3.0;
        let c = curvature(text, &[0.0, r, 1.2, 0.4], 2, 0);
        assert!(c.ricci.max_abs_value() < 1e-12);
        let expected = 48.0 * 0.25 / r.powi(6);
        assert!((c.kretschmann() - expected).abs() < 1e-12 * expected.max(1.0));
        assert!(!c.weyl.as_ref().unwrap().max_abs_value().is_nan());
    }

    #[test]
    fn weyl_undefined_in_dimension_two() {
        let c = curvature(SPHERE, &[1.0, 0.0], 2, 0);
        assert!(c.weyl.is_none());
        assert_eq!(
            weyl(&c.metric, &c.ricci, &c.scalar, &c.riemann).unwrap_err(),
            CurvatureError::UnsupportedDimension(2)
        );
    }

    #[test]
    fn conformally_flat_has_no_weyl() {
        let text = "dim=4; coords=[a,b,c,d]; g[1,1]=exp(2*a^2); g[2,2]=exp(2*a^2); g[3,3]=exp(2*a^2); g[4,4]=exp(2*a^2)";
        let c = curvature(text, &[0.3, -0.2, 0.5, 0.1], 2, 0);
        assert!(c.riemann.max_abs_value() > 0.1);
        assert!(c.weyl.unwrap().max_abs_value() < 1e-9);
    }

    #[test]
    fn order_bookkeeping() {
        let spec = parse_metric(SPHERE).unwrap();
        assert!(matches!(
            CurvaturePoint::compute(&spec, &[1.0, 0.0], 3, 2),
            Err(CurvatureError::InsufficientOrder { needed: 4, available: 3 })
        ));
        let c = CurvaturePoint::compute(&spec, &[1.0, 0.0], 4, 2).unwrap();
        assert_eq!(c.christoffel.order(), 3);
        assert_eq!(c.riemann.order(), 2);
        assert_eq!(c.derivatives[2].order(), 0);
        assert_eq!(c.derivatives[2].rank(), 6);
        let (g, inv) = metric_at(&spec, &[1.0, 0.0], 0).unwrap();
        assert!(matches!(christoffel(&g, &inv), Err(CurvatureError::InsufficientOrder { .. })));
    }

    #[test]
    fn metric_compatibility() {
        let text = "dim=3; coords=[x,y,z]; g[1,1]=1+x^2; g[1,2]=0.3*y*z; g[2,2]=2+sin(z); g[2,3]=0.1*x; g[3,3]=exp(y)";
        let c = curvature(text, &[0.2, -0.4, 0.7], 3, 0);
        let ng = covariant_derivative(&c.metric, &c.christoffel).unwrap();
        assert!(ng.entries().iter().all(|e| e.max_abs() < 1e-12));
        let ninv = covariant_derivative(&c.inverse, &c.christoffel).unwrap();
        assert!(ninv.max_abs_value() < 1e-12);
    }

    #[test]
    fn flat_covariant_derivative_is_partial() {
        let c = curvature("dim=2; coords=[x,y]; g[1,1]=1; g[2,2]=1", &[0.5, 0.5], 3, 0);
        let p = [0.5, 0.5];
        let x = Jet::seed(&p, 0, 2).unwrap();
        let y = Jet::seed(&p, 1, 2).unwrap();
        let t = Tensor::from_fn(2, vec![Down], |idx| if idx[0] == 0 { &x * &y } else { &x * &x });
        let nt = covariant_derivative(&t, &c.christoffel.truncate(2)).unwrap();
        assert!((nt.value(&[0, 0]) - 0.5).abs() < 1e-15); // ∂x(xy)
        assert!((nt.value(&[1, 0]) - 0.5).abs() < 1e-15); // ∂y(xy)
        assert!((nt.value(&[0, 1]) - 1.0).abs() < 1e-15); // ∂x(x²)
        assert_eq!(nt.value(&[1, 1]), 0.0);
    }

    #[test]
    fn riemann_symmetries_on_general_metric() {
        let text = "dim=3; coords=[x,y,z]; g[1,1]=1+x^2*y; g[1,2]=0.2*sin(x*z); g[1,3]=0.1*y^2; g[2,2]=1+z^2; g[2,3]=0.3*x*y; g[3,3]=2+cos(x+y)";
        let c = curvature(text, &[0.3, 0.6, -0.2], 2, 0);
        let r = &c.riemann;
        assert!(r.symmetry_defect(&[1, 0, 2, 3], -1.0) < 1e-12);
        assert!(r.symmetry_defect(&[0, 1, 3, 2], -1.0) < 1e-12);
        assert!(r.symmetry_defect(&[2, 3, 0, 1], 1.0) < 1e-12);
        assert!(c.ricci.symmetry_defect(&[1, 0], 1.0) < 1e-12);
        let kretschmann = c.kretschmann();
        assert!(kretschmann.is_finite() && kretschmann > 0.0);
    }
}
