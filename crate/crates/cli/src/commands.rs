//! Subcommand implementations. Each returns the parameters and results
//! blocks of a report plus any warnings.

use std::fs;

use diffinv::counting::{delta_count, generating_function, poincare, pole_order_at_one, s_count, series_expand};
use diffinv::invariants::{invariant_vector, FrameStatus, InvariantOptions, WeylTraceSet};
use diffinv::symmetry::{homogeneity, homogeneous_test, RankOptions};
use diffinv::{
    parse_metric, CountingError, CurvatureError, CurvaturePoint, InvariantError, MetricSpec, SymmetryError, Tensor,
};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::report::{bigs, MetricDigest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<CurvatureError> for CliError {
    fn from(e: CurvatureError) -> Self {
        if e.is_domain() {
            CliError::Domain(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

impl From<InvariantError> for CliError {
    fn from(e: InvariantError) -> Self {
        match e {
            InvariantError::Curvature(c) => c.into(),
            InvariantError::PowerRange { .. } | InvariantError::UnsupportedDimension(_) => CliError::Input(e.to_string()),
            InvariantError::SingularFrame { .. } => CliError::Domain(e.to_string()),
        }
    }
}

impl From<SymmetryError> for CliError {
    fn from(e: SymmetryError) -> Self {
        match e {
            SymmetryError::Invariant(inner) => inner.into(),
            SymmetryError::AllPointsSingular(_) => CliError::Domain(e.to_string()),
            SymmetryError::BoxDimension { .. } | SymmetryError::NoSamples | SymmetryError::OrderTooLow(_) => {
                CliError::Input(e.to_string())
            }
        }
    }
}

impl From<CountingError> for CliError {
    fn from(e: CountingError) -> Self {
        match e {
            CountingError::InvalidDimension(_) => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

pub struct Outcome {
    pub metric: Option<MetricDigest>,
    pub parameters: Value,
    pub results: Value,
    pub warnings: Vec<String>,
}

pub fn load_metric(path: &str) -> Result<(MetricSpec, MetricDigest), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::Input(format!("{path} is not UTF-8")))?;
    let spec = parse_metric(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    let digest = MetricDigest { path: path.to_string(), sha256: hex::encode(Sha256::digest(&bytes)) };
    Ok((spec, digest))
}

fn named_point(spec: &MetricSpec, point: &[f64]) -> Value {
    let mut map = Map::new();
    for (c, v) in spec.coords().iter().zip(point) {
        map.insert(c.clone(), json!(v));
    }
    Value::Object(map)
}

/// Nested arrays indexed slot by slot.
fn tensor_json(t: &Tensor) -> Value {
    fn nest(values: &[f64], n: usize, depth: usize) -> Value {
        if depth == 0 {
            return json!(values[0]);
        }
        let stride = values.len() / n;
        Value::Array((0..n).map(|i| nest(&values[i * stride..(i + 1) * stride], n, depth - 1)).collect())
    }
    let variance: String = t
        .variance()
        .iter()
        .map(|v| match v {
            diffinv::Variance::Up => 'u',
            diffinv::Variance::Down => 'd',
        })
        .collect();
    json!({ "variance": variance, "components": nest(&t.values(), t.dim(), t.rank()) })
}

pub fn curvature(metric: &str, point: &str, order: usize) -> Result<Outcome, CliError> {
    let (spec, digest) = load_metric(metric)?;
    let x = spec.parse_point(point).map_err(|e| CliError::Input(e.to_string()))?;
    let c = CurvaturePoint::compute(&spec, &x, 2 + order, order)?;
    let derivatives: Vec<Value> = c.derivatives.iter().skip(1).map(tensor_json).collect();
    let results = json!({
        "metric": tensor_json(&c.metric),
        "inverse_metric": tensor_json(&c.inverse),
        "christoffel": tensor_json(&c.christoffel),
        "riemann": tensor_json(&c.riemann),
        "ricci": tensor_json(&c.ricci),
        "scalar_curvature": c.scalar.value(),
        "ricci_operator": tensor_json(&c.ricci_operator),
        "weyl": c.weyl.as_ref().map(tensor_json),
        "kretschmann": c.kretschmann(),
        "riemann_derivatives": derivatives,
    });
    Ok(Outcome {
        metric: Some(digest),
        parameters: json!({ "point": named_point(&spec, &x), "order": order }),
        results,
        warnings: Vec::new(),
    })
}

pub struct InvariantArgs<'a> {
    pub metric: &'a str,
    pub point: &'a str,
    pub max_order: usize,
    pub a_power_range: usize,
    pub all_weyl_traces: bool,
    pub gradients: bool,
}

pub fn invariants(args: &InvariantArgs) -> Result<Outcome, CliError> {
    let (spec, digest) = load_metric(args.metric)?;
    let x = spec.parse_point(args.point).map_err(|e| CliError::Input(e.to_string()))?;
    let options = InvariantOptions {
        max_order: args.max_order,
        with_gradients: args.gradients,
        a_power_max: args.a_power_range,
        weyl_traces: if args.all_weyl_traces { WeylTraceSet::All } else { WeylTraceSet::Independent },
    };
    let v = invariant_vector(&spec, &x, &options)?;
    let mut warnings = Vec::new();
    if let FrameStatus::Singular { rank } = v.frame {
        warnings.push(format!(
            "SingularFrame: the differentials of I1..I{n} have rank {rank} < {n}; invariants above order {low} are omitted",
            n = spec.dim(),
            low = diffinv::invariants::first_higher_order(spec.dim()) - 1,
        ));
    }
    let labels: Vec<String> = v.labels.iter().map(|l| l.to_string()).collect();
    let mut results = json!({
        "count": v.len(),
        "labels": labels,
        "values": v.values_f64(),
        "frame": v.frame,
    });
    if let Some(g) = v.gradients() {
        let rows: Vec<Vec<f64>> = g.row_iter().map(|r| r.iter().copied().collect()).collect();
        results["gradients"] = json!(rows);
    }
    let parameters = json!({
        "point": named_point(&spec, &x),
        "max_order": args.max_order,
        "a_power_range": args.a_power_range,
        "weyl_traces": if args.all_weyl_traces { "all" } else { "independent" },
        "gradients": args.gradients,
    });
    Ok(Outcome { metric: Some(digest), parameters, results, warnings })
}

pub struct HomogeneityArgs<'a> {
    pub metric: &'a str,
    pub domain: &'a str,
    pub samples: usize,
    pub seed: u64,
    pub max_order: usize,
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub a_power_range: usize,
    pub order_bound: Option<usize>,
    pub homogeneous_tol: f64,
}

pub fn homogeneity_cmd(args: &HomogeneityArgs) -> Result<Outcome, CliError> {
    let (spec, digest) = load_metric(args.metric)?;
    let domain = spec.parse_box(args.domain).map_err(|e| CliError::Input(e.to_string()))?;
    let options = RankOptions {
        max_order: args.max_order,
        n_samples: args.samples,
        seed: args.seed,
        rel_tol: args.rel_tol,
        abs_floor: args.abs_floor,
        a_power_max: args.a_power_range,
        ..RankOptions::new(args.seed)
    };
    if options.a_power_max > spec.dim() {
        return Err(CliError::Input(format!("A-power range {} exceeds the dimension {}", args.a_power_range, spec.dim())));
    }
    let report = homogeneity(&spec, &domain, &options)?;
    let mut warnings = report.warnings.clone();
    let mut results = serde_json::to_value(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    if let Some(bound) = args.order_bound {
        let test = homogeneous_test(&spec, &domain, bound, args.homogeneous_tol, &options)?;
        if test.necessary_only {
            warnings.push(
                "pseudo-Riemannian signature: constant invariants are necessary for local homogeneity, not sufficient"
                    .to_string(),
            );
        }
        results["homogeneous_test"] = serde_json::to_value(&test).map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let boxes: Map<String, Value> =
        spec.coords().iter().zip(&domain).map(|(c, (lo, hi))| (c.clone(), json!([lo, hi]))).collect();
    let parameters = json!({
        "box": boxes,
        "samples": args.samples,
        "seed": args.seed,
        "max_order": args.max_order,
        "rel_tol": args.rel_tol,
        "abs_floor": args.abs_floor,
        "vanish_tol": options.vanish_tol,
        "a_power_range": args.a_power_range,
        "order_bound": args.order_bound,
        "homogeneous_tol": args.order_bound.map(|_| args.homogeneous_tol),
    });
    Ok(Outcome { metric: Some(digest), parameters, results, warnings })
}

pub fn count(dim: u32, max_k: u32) -> Result<Outcome, CliError> {
    let mut s = Vec::new();
    let mut delta = Vec::new();
    for k in 0..=max_k {
        s.push(s_count(dim, k)?);
        delta.push(delta_count(dim, k)?);
    }
    Ok(Outcome {
        metric: None,
        parameters: json!({ "dim": dim, "max_k": max_k }),
        results: json!({ "k": (0..=max_k).collect::<Vec<_>>(), "s": bigs(&s), "delta": bigs(&delta) }),
        warnings: Vec::new(),
    })
}

pub fn poincare_cmd(dim: u32, expand: usize) -> Result<Outcome, CliError> {
    let p = poincare(dim)?;
    let q = generating_function(dim)?;
    let results = json!({
        "poincare": {
            "expression": p.to_string(),
            "numerator": bigs(p.numerator()),
            "denominator": bigs(p.denominator()),
            "shift": p.shift(),
            "series": bigs(&series_expand(&p, expand)?),
            "pole_order_at_one": pole_order_at_one(&p),
        },
        "cumulative": {
            "expression": q.to_string(),
            "series": bigs(&series_expand(&q, expand)?),
        },
    });
    Ok(Outcome {
        metric: None,
        parameters: json!({ "dim": dim, "expand": expand }),
        results,
        warnings: Vec::new(),
    })
}
