use serde::Serialize;

use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Up,
    Down,
}

/// Dense tensor components at a point, one jet per entry, row-major over
/// the slots.
#[derive(Debug, Clone)]
pub struct Tensor {
    dim: usize,
    variance: Vec<Variance>,
    entries: Vec<Jet>,
}

impl Tensor {
    pub fn from_fn(dim: usize, variance: Vec<Variance>, mut entry: impl FnMut(&[usize]) -> Jet) -> Tensor {
        let rank = variance.len();
        let len = dim.pow(rank as u32);
        let mut index = vec![0; rank];
        let mut entries = Vec::with_capacity(len);
        for flat in 0..len {
            unflatten(flat, dim, &mut index);
            entries.push(entry(&index));
        }
        Tensor { dim, variance, entries }
    }

    pub(crate) fn from_entries(dim: usize, variance: Vec<Variance>, entries: Vec<Jet>) -> Tensor {
        debug_assert_eq!(entries.len(), dim.pow(variance.len() as u32));
        Tensor { dim, variance, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn entries(&self) -> &[Jet] {
        &self.entries
    }

    /// Jet order shared by all entries.
    pub fn order(&self) -> usize {
        self.entries[0].order()
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        index.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, index: &[usize]) -> &Jet {
        &self.entries[self.flat_index(index)]
    }

    /// Constant term of one entry.
    pub fn value(&self, index: &[usize]) -> f64 {
        self.get(index).value()
    }

    /// Constant terms of every entry, row-major.
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(Jet::value).collect()
    }

    /// Largest absolute constant term.
    pub fn max_abs_value(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.value().abs()))
    }

    pub fn truncate(&self, order: usize) -> Tensor {
        Tensor {
            dim: self.dim,
            variance: self.variance.clone(),
            entries: self.entries.iter().map(|e| e.truncate(order)).collect(),
        }
    }

    /// Largest constant-term deviation from `sign · T[permuted index]`,
    /// where `perm[s]` gives which slot of the original feeds slot `s`.
    pub fn symmetry_defect(&self, perm: &[usize], sign: f64) -> f64 {
        let mut permuted = vec![0; self.rank()];
        let mut index = vec![0; self.rank()];
        let mut worst: f64 = 0.0;
        for flat in 0..self.entries.len() {
            unflatten(flat, self.dim, &mut index);
            for (s, &p) in perm.iter().enumerate() {
                permuted[s] = index[p];
            }
            let d = self.entries[flat].value() - sign * self.value(&permuted);
            worst = worst.max(d.abs());
        }
        worst
    }
}

pub(crate) fn unflatten(mut flat: usize, dim: usize, index: &mut [usize]) {
    for slot in index.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}
