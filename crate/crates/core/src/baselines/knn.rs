//! Instance-based ranking: Borda over the k nearest training users.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::aggregate::borda_accumulate;
use crate::dataset::RankedDataset;
use crate::error::{Error, Result};
use crate::ranking::{ranking_from_scores, Ranking};
use crate::sparse::SparseVector;

pub const DEFAULT_NEIGHBORS: usize = 10;
pub const DEFAULT_POOL_SIZE: usize = 100_000;

/// Training users searched by the nearest-neighbour predictor.
#[derive(Debug, Clone)]
pub struct InstancePool {
    num_labels: usize,
    normalize: bool,
    points: Vec<SparseVector>,
    norms: Vec<f64>,
    rankings: Vec<Ranking>,
}

impl InstancePool {
    /// Seeded uniform subsample of at most `max_size` instances, kept in
    /// dataset order.
    pub fn subsample(
        dataset: &RankedDataset,
        max_size: usize,
        seed: u64,
        normalize: bool,
    ) -> Result<Self> {
        if dataset.is_empty() || max_size == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut picked: Vec<usize> = if max_size >= dataset.len() {
            (0..dataset.len()).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sample(&mut rng, dataset.len(), max_size).into_vec()
        };
        picked.sort_unstable();
        let prep = |x: &SparseVector| {
            if normalize {
                x.l2_normalized()
            } else {
                x.clone()
            }
        };
        let points: Vec<SparseVector> = picked
            .iter()
            .map(|&i| prep(&dataset.instances()[i].features))
            .collect();
        Ok(InstancePool {
            num_labels: dataset.num_labels(),
            normalize,
            norms: points.iter().map(SparseVector::squared_norm).collect(),
            points,
            rankings: picked
                .iter()
                .map(|&i| dataset.instances()[i].truth.clone())
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    /// Pool positions of the `k` nearest points by Euclidean distance;
    /// equal distances keep pool order.
    pub fn nearest(&self, x: &SparseVector, k: usize) -> Result<Vec<usize>> {
        if self.points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if k == 0 || k > self.points.len() {
            return Err(Error::InvalidConfig(format!(
                "k = {k} must be in 1..={}",
                self.points.len()
            )));
        }
        let dim = self.points[0].dim();
        if x.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.dim(),
            });
        }
        let query = if self.normalize {
            x.l2_normalized()
        } else {
            x.clone()
        };
        let dense = query.to_dense();
        let qn = query.squared_norm();
        let mut dist: Vec<(f64, usize)> = self
            .points
            .iter()
            .zip(&self.norms)
            .enumerate()
            .map(|(i, (p, pn))| ((pn + qn - 2.0 * p.dot_dense(&dense)).max(0.0), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, cmp);
            dist.truncate(k);
        }
        dist.sort_by(cmp);
        Ok(dist.into_iter().map(|(_, i)| i).collect())
    }

    /// Borda aggregate of the rankings of the `k` nearest neighbours.
    pub fn predict(&self, x: &SparseVector, k: usize) -> Result<Ranking> {
        let nearest = self.nearest(x, k)?;
        let mut credit = vec![0u64; self.num_labels];
        borda_accumulate(
            nearest.iter().map(|&i| &self.rankings[i]),
            self.num_labels,
            &mut credit,
        )?;
        let scores: Vec<f64> = credit.into_iter().map(|c| c as f64).collect();
        Ok(ranking_from_scores(&scores))
    }
}

/// k-nearest-neighbour ranking prediction over `pool`.
pub fn predict_ib(pool: &InstancePool, x: &SparseVector, k: usize) -> Result<Ranking> {
    pool.predict(x, k)
}
