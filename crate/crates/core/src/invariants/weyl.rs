//! Traces of compositions of the Weyl operator and the Ricci operator
//! acting on bivectors.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{ricci_traces, InvariantError};
use crate::curvature::{self, Tensor, Variance};
use crate::jet::Jet;
use crate::jetmat;

/// Index of `Tr(Λ²A^a ∘ W^b ∘ Λ²A^c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct WeylIndex {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl WeylIndex {
    /// Polynomial degree in the curvature.
    pub fn degree(&self) -> usize {
        self.a + self.b + self.c
    }
}

impl fmt::Display for WeylIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "J({},{},{})", self.a, self.b, self.c)
    }
}

/// Which Weyl traces to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeylTraceSet {
    /// A fixed subset of the family that is functionally independent
    /// (together with the Ricci traces) at a generic curvature tensor.
    #[default]
    Independent,
    /// Every `0 ≤ a ≤ c ≤ n`, `1 ≤ b ≤ C(n,2)`.
    All,
}

/// Bivector index pairs `i < j` in lexicographic order.
fn bivectors(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

pub(crate) fn bivector_dim(n: usize) -> usize {
    n * (n - 1) / 2
}

/// The Weyl tensor as an operator on bivectors, `W^{ij}_{kl}` for `i<j`, `k<l`.
pub fn weyl_operator(w: &Tensor, g_inv: &Tensor) -> Vec<Jet> {
    let n = w.dim();
    let order = w.order();
    let inv = g_inv.truncate(order);
    let pairs = bivectors(n);
    // W^i_{b k l} = g^{ia} W_{abkl}
    let half = Tensor::from_fn(n, vec![Variance::Up, Variance::Down, Variance::Down, Variance::Down], |idx| {
        let mut acc = Jet::zero(w.entries()[0].n_vars(), order);
        for a in 0..n {
            acc.add_product(inv.get(&[idx[0], a]), w.get(&[a, idx[1], idx[2], idx[3]]));
        }
        acc
    });
    let mut out = Vec::with_capacity(pairs.len() * pairs.len());
    for &(i, j) in &pairs {
        for &(k, l) in &pairs {
            let mut acc = Jet::zero(w.entries()[0].n_vars(), order);
            for b in 0..n {
                acc.add_product(inv.get(&[j, b]), half.get(&[i, b, k, l]));
            }
            out.push(acc);
        }
    }
    out
}

/// Induced action `u ∧ v ↦ Bu ∧ Bv` of an endomorphism on bivectors.
pub fn exterior_square(b: &[Jet], n: usize) -> Vec<Jet> {
    let pairs = bivectors(n);
    let mut out = Vec::with_capacity(pairs.len() * pairs.len());
    for &(i, j) in &pairs {
        for &(k, l) in &pairs {
            let mut e = &b[i * n + k] * &b[j * n + l];
            e -= &(&b[i * n + l] * &b[j * n + k]);
            out.push(e);
        }
    }
    out
}

/// The complete trace family with `a ≤ c`, ordered by degree in the
/// curvature, then `a`, `c`, `b`.
pub fn weyl_trace_family(n: usize) -> Vec<WeylIndex> {
    let mut family = Vec::new();
    for a in 0..=n {
        for c in a..=n {
            for b in 1..=bivector_dim(n) {
                family.push(WeylIndex { a, b, c });
            }
        }
    }
    family.sort_by_key(|w| (2 * w.a + w.b + 2 * w.c, w.a, w.c, w.b));
    family
}

/// Evaluates the requested traces. `Λ²A^a` and `Λ²A^c` commute, so each
/// trace equals `Tr(Λ²A^{a+c} W^b)`.
pub(crate) fn evaluate_traces(a: &Tensor, weyl_op: &[Jet], n: usize, wanted: &[WeylIndex]) -> Vec<Jet> {
    if wanted.is_empty() {
        return Vec::new();
    }
    let m = bivector_dim(n);
    let a_entries = jetmat::truncate(a.entries(), weyl_op[0].order());
    let lifted = exterior_square(&a_entries, n);
    let max_p = wanted.iter().map(|w| w.a + w.c).max().unwrap_or(0);
    let max_b = wanted.iter().map(|w| w.b).max().unwrap_or(1);
    let template = &weyl_op[0];
    let mut lifted_powers = vec![jetmat::identity(m, template.n_vars(), template.order())];
    for p in 1..=max_p {
        let next = jetmat::mul(&lifted_powers[p - 1], &lifted, m);
        lifted_powers.push(next);
    }
    let mut weyl_powers = vec![weyl_op.to_vec()];
    for b in 2..=max_b {
        let next = jetmat::mul(&weyl_powers[b - 2], weyl_op, m);
        weyl_powers.push(next);
    }
    let mut cache: HashMap<(usize, usize), Jet> = HashMap::new();
    wanted
        .iter()
        .map(|w| {
            let key = (w.a + w.c, w.b);
            cache
                .entry(key)
                .or_insert_with(|| {
                    if key.0 == 0 {
                        jetmat::trace(&weyl_powers[key.1 - 1], m)
                    } else {
                        jetmat::trace_of_product(&lifted_powers[key.0], &weyl_powers[key.1 - 1], m)
                    }
                })
                .clone()
        })
        .collect()
}

/// `Tr(W^{a,b,c})` for the chosen set. Empty for `n = 3`, where `W = 0`.
pub fn weyl_traces(
    a: &Tensor,
    w: Option<&Tensor>,
    g_inv: &Tensor,
    set: WeylTraceSet,
) -> Result<Vec<(WeylIndex, Jet)>, InvariantError> {
    let n = a.dim();
    if n < 3 {
        return Err(InvariantError::UnsupportedDimension(n));
    }
    if n == 3 {
        return Ok(Vec::new());
    }
    let w = w.ok_or(InvariantError::UnsupportedDimension(n))?;
    let wanted: Vec<WeylIndex> = match set {
        WeylTraceSet::All => weyl_trace_family(n),
        WeylTraceSet::Independent => independent_weyl_traces(n).to_vec(),
    };
    let op = weyl_operator(w, g_inv);
    let values = evaluate_traces(a, &op, n, &wanted);
    Ok(wanted.into_iter().zip(values).collect())
}

/// Number of algebraically independent order-2 invariants beyond the Ricci
/// traces, `(n+2)(n+1)n(n−3)/12`.
pub fn weyl_invariant_count(n: usize) -> usize {
    if n < 3 {
        return 0;
    }
    (n + 2) * (n + 1) * n * (n - 3) / 12
}

/// A subset of [`weyl_trace_family`] of size [`weyl_invariant_count`] that,
/// together with the Ricci traces, has full-rank differential at a random
/// algebraic curvature tensor. Chosen greedily in family order and cached.
pub fn independent_weyl_traces(n: usize) -> Arc<Vec<WeylIndex>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<WeylIndex>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("selection cache poisoned").get(&n) {
        return hit.clone();
    }
    let selected = Arc::new(select_independent(n));
    cache.lock().expect("selection cache poisoned").insert(n, selected.clone());
    selected
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-1.0..1.0);
            s[i * n + j] = v;
            s[j * n + i] = v;
        }
    }
    s
}

/// Kulkarni–Nomizu product of two symmetric forms.
fn kulkarni_nomizu(h: &[f64], k: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for p in 0..n {
                for q in 0..n {
                    out[((i * n + j) * n + p) * n + q] = h[i * n + p] * k[j * n + q] + h[j * n + q] * k[i * n + p]
                        - h[i * n + q] * k[j * n + p]
                        - h[j * n + p] * k[i * n + q];
                }
            }
        }
    }
    out
}

fn random_curvature(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> Vec<f64> {
    let mut total = vec![0.0; n.pow(4)];
    for _ in 0..terms {
        let h = random_symmetric(rng, n);
        let k = random_symmetric(rng, n);
        for (t, v) in total.iter_mut().zip(kulkarni_nomizu(&h, &k, n)) {
            *t += v;
        }
    }
    total
}

/// Residual norm separating new gradient directions from rounding noise.
const RESIDUAL: f64 = 1e-10;

fn select_independent(n: usize) -> Vec<WeylIndex> {
    let target = weyl_invariant_count(n);
    if target == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + n as u64);
    let directions = n * n * (n * n - 1) / 12 + 4;
    let base = random_curvature(&mut rng, n, 3);
    let tangents: Vec<Vec<f64>> = (0..directions).map(|_| random_curvature(&mut rng, n, 1)).collect();
    let riemann = Tensor::from_fn(n, vec![Variance::Down; 4], |idx| {
        let flat = ((idx[0] * n + idx[1]) * n + idx[2]) * n + idx[3];
        let mut coeffs = Vec::with_capacity(directions + 1);
        coeffs.push(base[flat]);
        coeffs.extend(tangents.iter().map(|t| t[flat]));
        Jet::from_coeffs(directions, 1, coeffs).expect("order-1 coefficient count")
    });
    let identity = |v: Variance| {
        Tensor::from_fn(n, vec![v; 2], |idx| Jet::constant(directions, 1, if idx[0] == idx[1] { 1.0 } else { 0.0 }))
    };
    let metric = identity(Variance::Down);
    let inverse = identity(Variance::Up);
    let mixed = Tensor::from_fn(n, vec![Variance::Up, Variance::Down, Variance::Down, Variance::Down], |idx| {
        riemann.get(idx).clone()
    });
    let (ric, scal) = curvature::ricci(&mixed, &inverse);
    let a = curvature::ricci_operator(&inverse, &ric);
    let w = curvature::weyl(&metric, &ric, &scal, &riemann).expect("n >= 4");
    let family = weyl_trace_family(n);
    let op = weyl_operator(&w, &inverse);
    let values = evaluate_traces(&a, &op, n, &family);

    // Identically vanishing traces (such as Tr W) leave only rounding noise,
    // which must not be normalized up to a unit row.
    let gradient = |j: &Jet| -> Vec<f64> {
        let g = j.gradient().expect("order-1 jet");
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm.max(j.value().abs()) > 1e-8 {
            g.iter().map(|x| x / norm.max(j.value().abs())).collect()
        } else {
            vec![0.0; g.len()]
        }
    };
    // Greedy Gram–Schmidt: a candidate is independent when its unit gradient
    // keeps a residual above `RESIDUAL` after projecting out the span so far.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let residual = |basis: &[Vec<f64>], row: Vec<f64>| -> Option<Vec<f64>> {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return None;
        }
        let mut r: Vec<f64> = row.iter().map(|x| x / norm).collect();
        for _ in 0..2 {
            for b in basis {
                let dot: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= dot * y;
                }
            }
        }
        let rn = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        (rn > RESIDUAL).then(|| r.iter().map(|x| x / rn).collect())
    };
    for row in ricci_traces(&a).iter().map(gradient) {
        if let Some(b) = residual(&basis, row) {
            basis.push(b);
        }
    }
    let mut selected = Vec::with_capacity(target);
    for (index, value) in family.iter().zip(&values) {
        if selected.len() == target {
            break;
        }
        if let Some(b) = residual(&basis, gradient(value)) {
            basis.push(b);
            selected.push(*index);
        }
    }
    selected
}
