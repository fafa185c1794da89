
use diffinv::symmetry::{default_order_bound, homogeneity, homogeneous_test, RankOptions};
use diffinv::{parse_metric, MetricSpec};
use proptest::prelude::*;

const COORDS: [&str; 3] = ["x", "y", "z"];

/// A metric on `R^3` whose components are quadratic polynomials in the
/// coordinates flagged in `uses`. Coefficients are consumed component by
/// component and reused cyclically if `coeffs` runs short.
fn metric_in(uses: [bool; 3], coeffs: &[f64]) -> MetricSpec {
    let vars: Vec<&str> = COORDS.iter().zip(uses).filter(|(_, u)| *u).map(|(c, _)| *c).collect();
    let mut terms: Vec<String> = vars.clone().into_iter().map(String::from).collect();
    for (i, a) in vars.iter().enumerate() {
        for b in &vars[i..] {
            terms.push(format!("{a}*{b}"));
        }
    }
    let mut text = String::from("dim=3; coords=[x,y,z]\n");
    let mut c = coeffs.iter().cycle();
    for i in 0..3 {
        for j in i..3 {
            let mut expr = if i == j { "1".to_string() } else { "0".to_string() };
            for t in &terms {
                expr.push_str(&format!(" + ({:.6})*{t}", c.next().expect("cycled")));
            }
            text.push_str(&format!("g[{},{}] = {expr}\n", i + 1, j + 1));
        }
    }
    parse_metric(&text).expect("generated metric parses")
}

fn options(max_order: usize) -> RankOptions {
    RankOptions { max_order, n_samples: 6, ..RankOptions::new(17) }
}

const DOMAIN: [(f64, f64); 3] = [(-0.3, 0.3); 3];

fn coefficients() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.15..0.15f64, 54..=54)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rank_is_monotone_in_order(coeffs in coefficients()) {
        let spec = metric_in([true; 3], &coeffs);
        let mut previous = 0;
        for k in 2..=4 {
            let rank = homogeneity(&spec, &DOMAIN, &options(k)).unwrap().consensus_rank;
            prop_assert!(rank >= previous, "rank {rank} at order {k} below {previous}");
            previous = rank;
        }
    }

    #[test]
    fn omitted_coordinate_gives_a_symmetry(coeffs in coefficients(), omit in 0..3usize) {
        let mut uses = [true; 3];
        uses[omit] = false;
        let report = homogeneity(&metric_in(uses, &coeffs), &DOMAIN, &options(3)).unwrap();
        prop_assert!(report.homogeneity >= 1);
    }

    #[test]
    fn rank_bounded_by_essential_coordinates(coeffs in coefficients(), keep in 0..3usize) {
        let mut uses = [false; 3];
        uses[keep] = true;
        let report = homogeneity(&metric_in(uses, &coeffs), &DOMAIN, &options(4)).unwrap();
        prop_assert!(report.consensus_rank <= 1);
    }
}

#[test]
fn generic_metric_has_full_rank() {
    let coeffs: Vec<f64> = (0..54).map(|i| 0.15 * ((i as f64 + 1.0) * 1.618).sin()).collect();
    let spec = metric_in([true; 3], &coeffs);
    let report = homogeneity(&spec, &DOMAIN, &options(3)).unwrap();
    assert_eq!(report.consensus_rank, 3);
    assert_eq!(report.homogeneity, 0);
}

#[test]
fn constant_curvature_is_homogeneous() {
    let sphere = parse_metric("dim=2; coords=[x,y]; g[1,1]=1; g[2,2]=sin(x)^2").unwrap();
    let hyperbolic = parse_metric("dim=2; coords=[x,y]; g[1,1]=1/y^2; g[2,2]=1/y^2").unwrap();
    let revolution = parse_metric("dim=2; coords=[x,y]; g[1,1]=1; g[2,2]=(2+sin(x))^2").unwrap();
    let bound = default_order_bound(2, 4);
    assert_eq!(bound, 1);
    let opts = RankOptions { n_samples: 8, ..RankOptions::new(3) };
    let domain = [(0.5, 2.5), (0.5, 2.5)];
    let t = homogeneous_test(&sphere, &domain, bound, 1e-6, &opts).unwrap();
    assert!(t.homogeneous && !t.necessary_only, "{t:?}");
    assert!(homogeneous_test(&hyperbolic, &domain, bound, 1e-6, &opts).unwrap().homogeneous);
    assert!(!homogeneous_test(&revolution, &domain, bound, 1e-6, &opts).unwrap().homogeneous);
}

#[test]
fn reports_are_reproducible() {
    let coeffs: Vec<f64> = (0..30).map(|i| 0.12 * ((i as f64 + 2.0) * 0.77).cos()).collect();
    let spec = metric_in([true, true, false], &coeffs);
    let a = homogeneity(&spec, &DOMAIN, &options(3)).unwrap();
    let b = homogeneity(&spec, &DOMAIN, &options(3)).unwrap();
    assert_eq!(a, b);
    let other = homogeneity(&spec, &DOMAIN, &RankOptions { seed: 18, ..options(3) }).unwrap();
    assert_ne!(a.samples[0].point, other.samples[0].point);
    assert_eq!(a.consensus_rank, other.consensus_rank);
}
