use super::*;
use crate::metric::parse_metric;

const S3: &str = "dim=3; coords=[a,b,c]; g[1,1]=1; g[2,2]=sin(a)^2; g[3,3]=sin(a)^2*sin(b)^2";
const GENERIC3: &str = "dim=3; coords=[x,y,z]
g[1,1]=1+0.3*x^2+0.1*y*z; g[1,2]=0.2*x*y; g[1,3]=0.05*z^2-0.1*x
g[2,2]=1+0.25*y^2+0.1*x*z; g[2,3]=0.15*y*z; g[3,3]=1+0.2*z^2+0.3*x*y";
const GENERIC4: &str = "dim=4; coords=[x,y,z,w]
g[1,1]=1+0.3*x^2+0.1*y*w; g[1,2]=0.2*x*y; g[1,3]=0.1*z*w; g[1,4]=0.05*y^2
g[2,2]=1+0.25*y^2+0.1*z; g[2,3]=0.15*x*w; g[2,4]=0.1*x*z
g[3,3]=1+0.2*z^2+0.3*x*w; g[3,4]=0.12*y*z; g[4,4]=1+0.1*w^2+0.2*x*y";
const PP_WAVE: &str = "dim=4; coords=[u,v,x,y]; signature=[-1,1,1,1]
g[1,1]=(x^2-y^2)*exp(u)+x*y*u; g[1,2]=1; g[2,2]=0; g[3,3]=1; g[4,4]=1";

fn opts(max_order: usize, with_gradients: bool) -> InvariantOptions {
    InvariantOptions { max_order, with_gradients, ..Default::default() }
}

#[test]
fn three_sphere_ricci_traces() {
    let spec = parse_metric(S3).unwrap();
    let v = invariant_vector(&spec, &[1.0, 0.8, 0.3], &opts(2, false)).unwrap();
    assert_eq!(v.len(), 3);
    let labels: Vec<String> = v.labels.iter().map(ToString::to_string).collect();
    assert_eq!(labels, ["I1", "I2", "I3"]);
    for (got, want) in v.values_f64().iter().zip([6.0, 12.0, 24.0]) {
        assert!((got - want).abs() < 1e-11, "{got} vs {want}");
    }
}

#[test]
fn flat_four_space_has_fourteen_zero_invariants() {
    let spec = parse_metric("dim=4; coords=[a,b,c,d]; g[1,1]=1; g[2,2]=1; g[3,3]=1; g[4,4]=1").unwrap();
    let v = invariant_vector(&spec, &[0.0; 4], &opts(2, false)).unwrap();
    assert_eq!(v.len(), 14);
    assert!(v.values_f64().iter().all(|&x| x == 0.0));
    let mut unique = v.labels.clone();
    unique.sort();
    unique.dedup();
    assert_eq!(unique.len(), 14);
}

#[test]
fn pp_wave_invariants_vanish() {
    let spec = parse_metric(PP_WAVE).unwrap();
    let point = [0.4, 0.1, 0.7, -0.3];
    let all = InvariantOptions { weyl_traces: WeylTraceSet::All, ..opts(2, true) };
    let v = invariant_vector(&spec, &point, &all).unwrap();
    for value in &v.values {
        assert!(value.max_abs() < 1e-10);
    }
    let curv = CurvaturePoint::compute(&spec, &point, 2, 0).unwrap();
    assert!(curv.riemann.max_abs_value() > 0.1);
}

#[test]
fn schwarzschild_weyl_square_trace() {
    let m = 1.5;
    let text = format!(
        "dim=4; coords=[t,r,th,ph]; signature=[-1,1,1,1]
         g[1,1]=-(1-2*{m}/r); g[2,2]=1/(1-2*{m}/r); g[3,3]=r^2; g[4,4]=r^2*sin(th)^2"
    );
    let spec = parse_metric(&text).unwrap();
    let r = 5.0;
    let all = InvariantOptions { weyl_traces: WeylTraceSet::All, ..opts(2, false) };
    let v = invariant_vector(&spec, &[0.0, r, 1.1, 0.2], &all).unwrap();
    let square = v.get(&InvariantLabel::Weyl(WeylIndex { a: 0, b: 2, c: 0 })).unwrap().value();
    let kretschmann = 48.0 * m * m / r.powi(6);
    assert!((4.0 * square - kretschmann).abs() < 1e-10 * kretschmann);
    for (label, value) in v.labels.iter().zip(v.values_f64()) {
        if let InvariantLabel::Weyl(w) = label {
            if w.a + w.c > 0 || w.b == 1 {
                assert!(value.abs() < 1e-12, "{label} = {value}");
            }
        }
    }
}

#[test]
fn trace_identity_under_reordering() {
    let spec = parse_metric(GENERIC4).unwrap();
    let curv = CurvaturePoint::compute(&spec, &[0.3, -0.2, 0.5, 0.4], 2, 0).unwrap();
    let n = 4;
    let m = 6;
    let lifted = exterior_square(curv.ricci_operator.entries(), n);
    let op = weyl_operator(curv.weyl.as_ref().unwrap(), &curv.inverse);
    let power = |x: &[Jet], p: usize| {
        let mut acc = jetmat::identity(m, n, 0);
        for _ in 0..p {
            acc = jetmat::mul(&acc, x, m);
        }
        acc
    };
    let direct = |a: usize, b: usize, c: usize| {
        let left = jetmat::mul(&power(&lifted, a), &power(&op, b), m);
        jetmat::trace(&jetmat::mul(&left, &power(&lifted, c), m), m).value()
    };
    let all = weyl_traces(&curv.ricci_operator, curv.weyl.as_ref(), &curv.inverse, WeylTraceSet::All).unwrap();
    for (w, value) in all.iter().filter(|(w, _)| w.degree() <= 5) {
        let forward = direct(w.a, w.b, w.c);
        let backward = direct(w.c, w.b, w.a);
        let scale = forward.abs().max(1.0);
        assert!((forward - backward).abs() < 1e-10 * scale);
        assert!((forward - value.value()).abs() < 1e-10 * scale);
    }
}

#[test]
fn three_dimensions_have_no_weyl_traces() {
    let spec = parse_metric(GENERIC3).unwrap();
    let curv = CurvaturePoint::compute(&spec, &[0.1, 0.2, 0.3], 2, 0).unwrap();
    let traces = weyl_traces(&curv.ricci_operator, curv.weyl.as_ref(), &curv.inverse, WeylTraceSet::All).unwrap();
    assert!(traces.is_empty());
    let surface = parse_metric("dim=2; coords=[x,y]; g[1,1]=1; g[2,2]=sin(x)^2").unwrap();
    let curv = CurvaturePoint::compute(&surface, &[1.0, 0.0], 2, 0).unwrap();
    assert_eq!(
        weyl_traces(&curv.ricci_operator, None, &curv.inverse, WeylTraceSet::All).unwrap_err(),
        InvariantError::UnsupportedDimension(2)
    );
}

#[test]
fn homogeneous_space_has_singular_frame() {
    let spec = parse_metric(S3).unwrap();
    let v = invariant_vector(&spec, &[1.0, 0.8, 0.3], &opts(3, false)).unwrap();
    assert_eq!(v.frame, FrameStatus::Singular { rank: 0 });
    assert_eq!(v.len(), 3);
}

#[test]
fn generic_frame_inverts_jacobian() {
    let spec = parse_metric(GENERIC3).unwrap();
    let curv = CurvaturePoint::compute(&spec, &[0.2, 0.4, -0.3], 3, 0).unwrap();
    let traces = ricci_traces(&curv.ricci_operator.truncate(1));
    let frame = tresse_frame(&traces).unwrap();
    let product = &frame.jacobian * frame.matrix();
    assert!((product - DMatrix::identity(3, 3)).abs().max() < 1e-8);
    assert!(frame.condition_number >= 1.0);
}

#[test]
fn surface_of_revolution_frame_has_rank_one() {
    let spec = parse_metric("dim=2; coords=[x,y]; g[1,1]=1; g[2,2]=(2+sin(x))^2").unwrap();
    let v = invariant_vector(&spec, &[0.7, 0.2], &opts(4, false)).unwrap();
    assert_eq!(v.frame, FrameStatus::Singular { rank: 1 });
    let labels: Vec<String> = v.labels.iter().map(ToString::to_string).collect();
    assert_eq!(labels, ["I1", "I2'"]);
    let x: f64 = 0.7;
    let gauss = x.sin() / (2.0 + x.sin());
    assert!((v.values[0].value() - 2.0 * gauss).abs() < 1e-12);
}

#[test]
fn coordinate_frame_on_constant_curvature_gives_zeros() {
    let spec = parse_metric(S3).unwrap();
    let point = [1.0, 0.8, 0.3];
    let curv = CurvaturePoint::compute(&spec, &point, 3, 1).unwrap();
    let coords: Vec<Jet> = (0..3).map(|i| Jet::seed(&point, i, 1).unwrap()).collect();
    let frame = tresse_frame(&coords).unwrap();
    assert!((frame.matrix() - DMatrix::identity(3, 3)).abs().max() == 0.0);
    let h = higher_invariants(&curv, &frame, 3, 1).unwrap();
    assert_eq!(h.len(), 3 * 16 * 81);
    assert!(h.iter().all(|(_, v)| v.value().abs() < 1e-9));
}

#[test]
fn third_order_block_size_and_labels() {
    let spec = parse_metric(GENERIC3).unwrap();
    let v = invariant_vector(&spec, &[0.2, 0.4, -0.3], &opts(3, false)).unwrap();
    assert!(matches!(v.frame, FrameStatus::Regular { .. }));
    assert_eq!(v.len(), 3 + 3888);
    assert_eq!(v.labels[3].to_string(), "H(i=1;s=0,0,0,0;j=1,1,1,1)");
    assert_eq!(v.labels.last().unwrap().to_string(), "H(i=3;s=1,1,1,1;j=3,3,3,3)");
    assert!(v.labels.iter().skip(3).all(|l| l.order() == 3));
    let max = v.values_f64().iter().skip(3).fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(max > 1e-6);
}

#[test]
fn two_dimensional_blocks() {
    let spec = parse_metric("dim=2; coords=[x,y]; g[1,1]=1+x^2*y; g[1,2]=0.1*x; g[2,2]=1+y^2").unwrap();
    let v = invariant_vector(&spec, &[0.3, 0.5], &opts(4, false)).unwrap();
    assert!(matches!(v.frame, FrameStatus::Regular { .. }));
    assert_eq!(v.len(), 2 + 4 * 16 * 16);
    assert!(v.labels[2..].iter().all(|l| l.order() == 4));
    let v3 = invariant_vector(&spec, &[0.3, 0.5], &opts(3, false)).unwrap();
    assert_eq!(v3.frame, FrameStatus::NotRequired);
    assert_eq!(v3.len(), 2);
}

#[test]
fn killing_direction_annihilates_invariants() {
    let spec = parse_metric(
        "dim=3; coords=[x,y,z]
         g[1,1]=1+0.3*x^2+0.1*z; g[1,2]=0.2*x*z; g[1,3]=0.1*x; g[2,2]=1+0.25*z^2+0.1*x; g[2,3]=0.15*z; g[3,3]=1+0.2*x*z",
    )
    .unwrap();
    let v = invariant_vector(&spec, &[0.3, 0.7, -0.4], &opts(3, true)).unwrap();
    let grads = v.gradients().unwrap();
    assert_eq!(grads.nrows(), v.len());
    for r in 0..grads.nrows() {
        assert!(grads[(r, 1)].abs() < 1e-9, "row {} ({})", r, v.labels[r]);
    }
}

#[test]
fn power_range_is_bounded_by_dimension() {
    let spec = parse_metric(GENERIC3).unwrap();
    let bad = InvariantOptions { a_power_max: 4, ..opts(3, false) };
    assert_eq!(
        invariant_vector(&spec, &[0.0; 3], &bad).unwrap_err(),
        InvariantError::PowerRange { requested: 4, dim: 3 }
    );
}
