use std::fmt;

use serde::{Deserialize, Serialize};

/// Fourier mode `I ∈ Z^{2n}` labelling the exponential `e^{i<I,x>}`.
///
/// Ordering is lexicographic on the entries, which fixes the iteration
/// order of every coefficient map in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i32>);

impl MultiIndex {
    pub fn new(entries: Vec<i32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// Unit vector `e_k` (0-based `k`).
    pub fn unit(dim: usize, k: usize) -> Self {
        let mut v = vec![0; dim];
        v[k] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i32] {
        &self.0
    }

    pub fn get(&self, k: usize) -> i32 {
        self.0[k]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn l1_norm(&self) -> u64 {
        self.0.iter().map(|&x| x.unsigned_abs() as u64).sum()
    }

    pub fn linf_norm(&self) -> u64 {
        self.0.iter().map(|&x| x.unsigned_abs() as u64).max().unwrap_or(0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|x| -x).collect())
    }

    /// `<v, I>` accumulated left to right from `0.0`.
    pub fn dot(&self, v: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(v)
            .fold(0.0, |acc, (&i, &w)| acc + w * i as f64)
    }
}

impl From<Vec<i32>> for MultiIndex {
    fn from(v: Vec<i32>) -> Self {
        MultiIndex(v)
    }
}

impl<const N: usize> From<[i32; N]> for MultiIndex {
    fn from(v: [i32; N]) -> Self {
        MultiIndex(v.to_vec())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, x) in self.0.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}
