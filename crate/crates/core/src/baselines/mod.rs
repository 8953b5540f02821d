//! Baseline rankers.

pub mod aggregate;
pub mod central;
pub mod knn;
pub mod logistic;

pub use aggregate::{borda_aggregate, kemeny_exact, KEMENY_MAX_LABELS};
pub use central::{fit_ag, fit_central, CentralRankModel, DemoLayout, GroupedRankModel};
pub use knn::{predict_ib, InstancePool};
pub use logistic::{fit_lr, fit_pw, BinaryLogistic, LinearOvrModel, PairwiseModel};

use crate::amm::AmmModel;
use crate::error::Result;
use crate::ranking::Ranking;
use crate::sparse::SparseVector;

/// Anything that maps a feature vector to a full label ranking.
pub trait RankPredictor: Sync {
    fn num_labels(&self) -> usize;
    fn predict(&self, x: &SparseVector) -> Result<Ranking>;
}

impl RankPredictor for AmmModel {
    fn num_labels(&self) -> usize {
        AmmModel::num_labels(self)
    }
    fn predict(&self, x: &SparseVector) -> Result<Ranking> {
        self.predict_ranking(x)
    }
}

impl RankPredictor for CentralRankModel {
    fn num_labels(&self) -> usize {
        self.central.len()
    }
    fn predict(&self, x: &SparseVector) -> Result<Ranking> {
        Ok(CentralRankModel::predict(self, x))
    }
}

impl RankPredictor for GroupedRankModel {
    fn num_labels(&self) -> usize {
        self.fallback.len()
    }
    fn predict(&self, x: &SparseVector) -> Result<Ranking> {
        Ok(GroupedRankModel::predict(self, x))
    }
}

impl RankPredictor for LinearOvrModel {
    fn num_labels(&self) -> usize {
        LinearOvrModel::num_labels(self)
    }
    fn predict(&self, x: &SparseVector) -> Result<Ranking> {
        LinearOvrModel::predict(self, x)
    }
}

impl RankPredictor for PairwiseModel {
    fn num_labels(&self) -> usize {
        self.num_labels
    }
    fn predict(&self, x: &SparseVector) -> Result<Ranking> {
        PairwiseModel::predict(self, x)
    }
}

/// An instance pool paired with its neighbourhood size.
#[derive(Debug, Clone)]
pub struct KnnRanker {
    pub pool: InstancePool,
    pub k: usize,
}

impl RankPredictor for KnnRanker {
    fn num_labels(&self) -> usize {
        self.pool.num_labels()
    }
    fn predict(&self, x: &SparseVector) -> Result<Ranking> {
        self.pool.predict(x, self.k)
    }
}
