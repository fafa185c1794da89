#![allow(dead_code)]

use diffinv::jet::{Jet, JetError};
use diffinv::metric::{parse_expression, Expr, MetricSource, MetricSpec};
use diffinv::parse_metric;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const COORDS3: [&str; 3] = ["x", "y", "z"];

/// Polynomial coordinate changes, invertible near the origin.
pub const MAPS: [[&str; 3]; 3] = [
    ["x + 0.3*y^2", "y - 0.2*x*z", "z + 0.1*x^3"],
    ["1.5*x + 0.2*y", "y + 0.25*z^2", "0.2*x*y - z"],
    ["x + 0.2*y*z", "y + 0.3*x^2 - 0.1*z", "z + 0.2*x*y + 0.1*y^3"],
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exponent vectors of total degree `0..=degree` in `n` variables.
pub fn monomials(n: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; n]];
    for _ in 0..degree {
        let mut next = Vec::new();
        for m in &out {
            for v in 0..n {
                let mut e = m.clone();
                e[v] += 1;
                if !next.contains(&e) && !out.contains(&e) {
                    next.push(e);
                }
            }
        }
        out.extend(next);
    }
    out
}

fn monomial_text(exps: &[usize], coords: &[&str]) -> String {
    let factors: Vec<String> = exps
        .iter()
        .zip(coords)
        .filter(|(e, _)| **e > 0)
        .map(|(e, c)| if *e == 1 { c.to_string() } else { format!("{c}^{e}") })
        .collect();
    factors.join("*")
}

/// `δ_ij + Σ c_α x^α` with `|α| ≤ degree`, `|c| ≤ scale`.
pub fn random_polynomial_metric(rng: &mut ChaCha8Rng, coords: &[&str], degree: usize, scale: f64) -> MetricSpec {
    let n = coords.len();
    let monos = monomials(n, degree);
    let mut text = format!("dim={n}; coords=[{}]\n", coords.join(","));
    for i in 0..n {
        for j in i..n {
            let mut expr = if i == j { "1".to_string() } else { "0".to_string() };
            for m in monos.iter().skip(1) {
                let c: f64 = rng.gen_range(-scale..scale);
                let sign = if c < 0.0 { "-" } else { "+" };
                expr.push_str(&format!(" {sign} {:.6}*{}", c.abs(), monomial_text(m, coords)));
            }
            text.push_str(&format!("g[{},{}] = {}\n", i + 1, j + 1, expr));
        }
    }
    parse_metric(&text).expect("generated metric parses")
}

/// The metric `φ^*g` for a polynomial map `φ` given in the same coordinates.
pub struct Pullback {
    pub base: MetricSpec,
    pub map: Vec<Expr>,
}

impl Pullback {
    pub fn new(base: MetricSpec, map: &[&str]) -> Pullback {
        let coords = base.coords().to_vec();
        let map = map.iter().map(|m| parse_expression(m, &coords).expect("map parses")).collect();
        Pullback { base, map }
    }

    pub fn image(&self, point: &[f64]) -> Vec<f64> {
        self.map.iter().map(|e| e.eval_f64(point)).collect()
    }
}

impl MetricSource for Pullback {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn signature(&self) -> Vec<i8> {
        self.base.signature().to_vec()
    }

    fn component_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, JetError> {
        let n = self.dim();
        let phi = self.map.iter().map(|e| e.eval(point, order + 1)).collect::<Result<Vec<_>, _>>()?;
        let phi_k: Vec<Jet> = phi.iter().map(|p| p.truncate(order)).collect();
        let mut d = Vec::with_capacity(n * n);
        for p in &phi {
            for i in 0..n {
                d.push(p.derivative(i)?);
            }
        }
        let mut g = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                g.push(self.base.component(a, b).eval_with(&phi_k)?);
            }
        }
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Jet::zero(n, order);
                for a in 0..n {
                    for b in 0..n {
                        let t = &d[a * n + i] * &g[a * n + b];
                        acc.add_product(&t, &d[b * n + j]);
                    }
                }
                out.push(acc);
            }
        }
        Ok(out)
    }
}

/// `g_ij(x) = Σ_α c_{ij,α} x^α`, a polynomial metric given by its Taylor
/// coefficients at the origin.
#[derive(Clone)]
pub struct TaylorMetric {
    pub n: usize,
    pub monomials: Vec<Vec<usize>>,
    /// Packed upper triangle, one coefficient vector per component.
    pub coeffs: Vec<Vec<f64>>,
}

impl TaylorMetric {
    pub fn random(rng: &mut ChaCha8Rng, n: usize, degree: usize, scale: f64) -> TaylorMetric {
        let monomials = monomials(n, degree);
        let mut coeffs = Vec::new();
        for i in 0..n {
            for j in i..n {
                let mut c: Vec<f64> = monomials.iter().map(|_| rng.gen_range(-scale..scale)).collect();
                c[0] = if i == j { 1.0 } else { c[0] * 0.5 };
                coeffs.push(c);
            }
        }
        TaylorMetric { n, monomials, coeffs }
    }

    pub fn parameter_count(&self) -> usize {
        self.coeffs.len() * self.monomials.len()
    }

    pub fn perturbed(&self, param: usize, h: f64) -> TaylorMetric {
        let mut out = self.clone();
        let m = self.monomials.len();
        out.coeffs[param / m][param % m] += h;
        out
    }
}

impl MetricSource for TaylorMetric {
    fn dim(&self) -> usize {
        self.n
    }

    fn signature(&self) -> Vec<i8> {
        vec![1; self.n]
    }

    fn component_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, JetError> {
        let n = self.n;
        let seeds = (0..n).map(|v| Jet::seed(point, v, order)).collect::<Result<Vec<_>, _>>()?;
        let basis: Vec<Jet> = self
            .monomials
            .iter()
            .map(|e| {
                let mut acc = Jet::constant(n, order, 1.0);
                for (v, &p) in e.iter().enumerate() {
                    for _ in 0..p {
                        acc = &acc * &seeds[v];
                    }
                }
                acc
            })
            .collect();
        let mut packed = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let mut acc = Jet::zero(n, order);
            for (b, &w) in basis.iter().zip(c) {
                acc += &b.scale(w);
            }
            packed.push(acc);
        }
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                out.push(packed[a * n - a * (a + 1) / 2 + b].clone());
            }
        }
        Ok(out)
    }
}

/// Descending singular values.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Relative comparison used for invariant values.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
