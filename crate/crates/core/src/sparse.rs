//! Sparse feature vectors.
//!
//! Indices are stored 0-based. Text formats use 1-based indices and convert
//! at the IO boundary.

use crate::error::{Error, Result};

/// A feature vector stored as strictly increasing `(index, value)` pairs.
///
/// Zero values are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    /// The all-zero vector of dimension `dim`.
    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a vector from `(index, value)` pairs in any order.
    ///
    /// Zero values are dropped. Duplicate or out-of-range indices are
    /// rejected.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(usize, f64)>) -> Result<Self> {
        pairs.sort_by_key(|&(i, _)| i);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if i >= dim {
                return Err(Error::IndexOutOfRange { index: i + 1, dim });
            }
            if indices.last() == Some(&i) {
                return Err(Error::Invalid(format!("duplicate feature index {}", i + 1)));
            }
            if !v.is_finite() {
                return Err(Error::Invalid(format!(
                    "non-finite value at feature index {}",
                    i + 1
                )));
            }
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
        }
        Ok(SparseVector {
            dim,
            indices,
            values,
        })
    }

    /// Builds a sparse vector from a dense slice.
    pub fn from_dense(dense: &[f64]) -> Self {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, v))
            .unzip();
        SparseVector {
            dim: dense.len(),
            indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates over stored `(index, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    /// Value at `index`, zero when not stored.
    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    /// Dot product with a dense vector of the same dimension.
    #[inline]
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        debug_assert_eq!(dense.len(), self.dim);
        self.iter().map(|(i, v)| dense[i] * v).sum()
    }

    /// `dense += coef * self`.
    #[inline]
    pub fn add_scaled_to(&self, coef: f64, dense: &mut [f64]) {
        debug_assert_eq!(dense.len(), self.dim);
        for (i, v) in self.iter() {
            dense[i] += coef * v;
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Squared Euclidean distance, computed by merging the two supports.
    pub fn squared_distance(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (0, 0);
        let mut acc = 0.0;
        while a < self.indices.len() && b < other.indices.len() {
            let (ia, ib) = (self.indices[a], other.indices[b]);
            if ia == ib {
                let d = self.values[a] - other.values[b];
                acc += d * d;
                a += 1;
                b += 1;
            } else if ia < ib {
                acc += self.values[a] * self.values[a];
                a += 1;
            } else {
                acc += other.values[b] * other.values[b];
                b += 1;
            }
        }
        acc += self.values[a..].iter().map(|v| v * v).sum::<f64>();
        acc += other.values[b..].iter().map(|v| v * v).sum::<f64>();
        acc
    }

    /// Copy scaled to unit Euclidean norm. The zero vector is returned as is.
    pub fn l2_normalized(&self) -> SparseVector {
        let norm = self.squared_norm().sqrt();
        if norm == 0.0 {
            return self.clone();
        }
        SparseVector {
            dim: self.dim,
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v / norm).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            dense[i] = v;
        }
        dense
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_pairs_sorts_and_drops_zeros() {
        let v = SparseVector::from_pairs(5, vec![(3, 1.0), (0, 0.5), (2, 0.0)]).unwrap();
        assert_eq!(v.indices(), &[0, 3]);
        assert_eq!(v.values(), &[0.5, 1.0]);
        assert_eq!(v.get(2), 0.0);
        assert_eq!(v.get(3), 1.0);
    }

    #[test]
    fn from_pairs_rejects_duplicates_and_bounds() {
        assert!(SparseVector::from_pairs(5, vec![(1, 1.0), (1, 2.0)]).is_err());
        assert!(matches!(
            SparseVector::from_pairs(2, vec![(2, 1.0)]),
            Err(Error::IndexOutOfRange { index: 3, dim: 2 })
        ));
    }

    #[test]
    fn distance_matches_dense() {
        let a = SparseVector::from_dense(&[1.0, 0.0, 2.0, 0.0]);
        let b = SparseVector::from_dense(&[0.0, 3.0, 1.0, 0.0]);
        assert_eq!(a.squared_distance(&b), 1.0 + 9.0 + 1.0);
        assert_eq!(a.squared_distance(&a), 0.0);
    }

    #[test]
    fn normalize_unit_norm() {
        let v = SparseVector::from_dense(&[3.0, 4.0]).l2_normalized();
        assert!((v.squared_norm() - 1.0).abs() < 1e-12);
        let z = SparseVector::zeros(3).l2_normalized();
        assert!(z.is_empty());
    }
}
