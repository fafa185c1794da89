use std::fmt;

use serde::Serialize;

use super::{InvariantError, TresseFrame};
use crate::curvature::{CurvatureError, CurvaturePoint};
use crate::jet::Jet;
use crate::jetmat;

/// `(∇_{i_1}…∇_{i_{k−2}}R)(A^{s_1}∇_{j_1}, …, A^{s_4}∇_{j_4})`, indices 0-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HigherIndex {
    pub derivatives: Vec<usize>,
    pub powers: [usize; 4],
    pub slots: [usize; 4],
}

impl HigherIndex {
    pub fn order(&self) -> usize {
        self.derivatives.len() + 2
    }
}

fn join(items: impl Iterator<Item = usize>) -> String {
    items.map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for HigherIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "H(i={};s={};j={})",
            join(self.derivatives.iter().map(|i| i + 1)),
            join(self.powers.iter().copied()),
            join(self.slots.iter().map(|j| j + 1)),
        )
    }
}

/// Contracts the leading free slot of `data` (shape `[labels, n, rest…]`)
/// against each of `vectors`, giving shape `[labels · vectors.len(), rest…]`.
fn contract_leading(data: &[Jet], labels: usize, n: usize, vectors: &[Vec<Jet>]) -> Vec<Jet> {
    let rest = data.len() / (labels * n);
    let template = &data[0];
    let mut out = Vec::with_capacity(labels * vectors.len() * rest);
    for l in 0..labels {
        for v in vectors {
            for r in 0..rest {
                let mut acc = Jet::zero(template.n_vars(), template.order());
                for (m, component) in v.iter().enumerate() {
                    acc.add_product(component, &data[(l * n + m) * rest + r]);
                }
                out.push(acc);
            }
        }
    }
    out
}

/// All contractions of `∇^{k−2}R` with Tresse frame vectors on the
/// derivative slots and `A^s ∇_j`, `0 ≤ s ≤ a_power_max`, on the curvature
/// slots. Results are sorted by label.
pub fn higher_invariants(
    curv: &CurvaturePoint,
    frame: &TresseFrame,
    k: usize,
    a_power_max: usize,
) -> Result<Vec<(HigherIndex, Jet)>, InvariantError> {
    let n = curv.dim();
    if k < 3 {
        return Ok(Vec::new());
    }
    if a_power_max > n {
        return Err(InvariantError::PowerRange { requested: a_power_max, dim: n });
    }
    let s = k - 2;
    let tensor = curv
        .derivatives
        .get(s)
        .ok_or(CurvatureError::InsufficientOrder { needed: curv.order + 1, available: curv.order })?;
    let order = tensor.order().min(frame.order());
    let tensor = tensor.truncate(order);
    let frame = frame.truncate(order);
    let a = jetmat::truncate(curv.ricci_operator.entries(), order);

    let mut weighted: Vec<Vec<Jet>> = Vec::with_capacity((a_power_max + 1) * n);
    let mut power = jetmat::identity(n, a[0].n_vars(), order);
    for p in 0..=a_power_max {
        if p > 0 {
            power = jetmat::mul(&power, &a, n);
        }
        for v in &frame.frame {
            let image = (0..n)
                .map(|row| {
                    let mut acc = Jet::zero(a[0].n_vars(), order);
                    for (col, comp) in v.iter().enumerate() {
                        acc.add_product(&power[row * n + col], comp);
                    }
                    acc
                })
                .collect();
            weighted.push(image);
        }
    }

    let mut data = tensor.entries().to_vec();
    let mut labels = 1;
    for _ in 0..s {
        data = contract_leading(&data, labels, n, &frame.frame);
        labels *= n;
    }
    for _ in 0..4 {
        data = contract_leading(&data, labels, n, &weighted);
        labels *= weighted.len();
    }

    let radix = weighted.len();
    let mut out: Vec<(HigherIndex, Jet)> = data
        .into_iter()
        .enumerate()
        .map(|(mut flat, value)| {
            let mut powers = [0; 4];
            let mut slots = [0; 4];
            for t in (0..4).rev() {
                let digit = flat % radix;
                flat /= radix;
                powers[t] = digit / n;
                slots[t] = digit % n;
            }
            let mut derivatives = vec![0; s];
            for p in (0..s).rev() {
                derivatives[p] = flat % n;
                flat /= n;
            }
            (HigherIndex { derivatives, powers, slots }, value)
        })
        .collect();
    out.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(out)
}
