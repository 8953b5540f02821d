//! Algorithm dispatch, model files, and cross-validated comparisons.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::amm::{train_multiclass, train_rank, AmmModel, TrainConfig};
use crate::baselines::knn::{DEFAULT_NEIGHBORS, DEFAULT_POOL_SIZE};
use crate::baselines::{
    fit_ag, fit_central, fit_lr, fit_pw, CentralRankModel, GroupedRankModel, InstancePool,
    KnnRanker, LinearOvrModel, PairwiseModel, RankPredictor,
};
use crate::dataset::RankedDataset;
use crate::error::{Error, Result};
use crate::metrics::{evaluate, EvalReport, TopK};
use crate::pipeline::FeatureLayout;
use crate::ranking::Ranking;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Multiclass AMM on the top-ranked label.
    Amm,
    AmmRank,
    CentralMal,
    AgMal,
    IbMal,
    Lr,
    PwLr,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Amm,
        Algorithm::AmmRank,
        Algorithm::CentralMal,
        Algorithm::AgMal,
        Algorithm::IbMal,
        Algorithm::Lr,
        Algorithm::PwLr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Amm => "amm",
            Algorithm::AmmRank => "amm-rank",
            Algorithm::CentralMal => "central-mal",
            Algorithm::AgMal => "ag-mal",
            Algorithm::IbMal => "ib-mal",
            Algorithm::Lr => "lr",
            Algorithm::PwLr => "pw-lr",
        }
    }

    /// Whether the regularization parameter affects this algorithm.
    pub fn uses_lambda(self) -> bool {
        matches!(
            self,
            Algorithm::Amm | Algorithm::AmmRank | Algorithm::Lr | Algorithm::PwLr
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                Error::InvalidConfig(format!(
                    "unknown algorithm '{s}' (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

/// Hyperparameters for every algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoConfig {
    pub train: TrainConfig,
    pub neighbors: usize,
    pub pool_size: usize,
}

impl Default for AlgoConfig {
    fn default() -> Self {
        AlgoConfig {
            train: TrainConfig::default(),
            neighbors: DEFAULT_NEIGHBORS,
            pool_size: DEFAULT_POOL_SIZE,
        }
    }
}

#[derive(Debug, Clone)]
pub enum TrainedModel {
    Amm(AmmModel),
    Central(CentralRankModel),
    Grouped(GroupedRankModel),
    Knn(KnnRanker),
    Lr(LinearOvrModel),
    Pw(PairwiseModel),
}

impl TrainedModel {
    pub fn predictor(&self) -> &dyn RankPredictor {
        match self {
            TrainedModel::Amm(m) => m,
            TrainedModel::Central(m) => m,
            TrainedModel::Grouped(m) => m,
            TrainedModel::Knn(m) => m,
            TrainedModel::Lr(m) => m,
            TrainedModel::Pw(m) => m,
        }
    }

    /// Model file contents; the instance-based ranker has none.
    pub fn to_text(&self) -> Option<String> {
        match self {
            TrainedModel::Amm(m) => Some(m.to_text()),
            TrainedModel::Central(m) => Some(m.to_text()),
            TrainedModel::Grouped(m) => Some(m.to_text()),
            TrainedModel::Knn(_) => None,
            TrainedModel::Lr(m) => Some(m.to_text()),
            TrainedModel::Pw(m) => Some(m.to_text()),
        }
    }

    /// Reads any model file, dispatching on its header tag.
    pub fn parse_str(text: &str) -> Result<Self> {
        let tag = text
            .lines()
            .next()
            .and_then(|l| l.split_whitespace().next())
            .unwrap_or("");
        let bytes = text.as_bytes();
        Ok(match tag {
            "#amm" => TrainedModel::Amm(AmmModel::read(bytes)?),
            "#central" => TrainedModel::Central(CentralRankModel::read(bytes)?),
            "#ag" => TrainedModel::Grouped(GroupedRankModel::read(bytes)?),
            "#lr" => TrainedModel::Lr(LinearOvrModel::read(bytes)?),
            "#pw" => TrainedModel::Pw(PairwiseModel::read(bytes)?),
            other => return Err(Error::parse(1, format!("unknown model type '{other}'"))),
        })
    }
}

/// Trains `algo` on `dataset`.
///
/// The demographic ranker finds its one-hot columns from the feature layout
/// implied by `(L, d)`; the instance-based ranker only subsamples its pool.
pub fn train(algo: Algorithm, dataset: &RankedDataset, cfg: &AlgoConfig) -> Result<TrainedModel> {
    Ok(match algo {
        Algorithm::Amm => TrainedModel::Amm(train_multiclass(dataset, &cfg.train)?),
        Algorithm::AmmRank => TrainedModel::Amm(train_rank(dataset, &cfg.train)?),
        Algorithm::CentralMal => TrainedModel::Central(fit_central(dataset)?),
        Algorithm::AgMal => {
            let layout = FeatureLayout::infer(dataset.num_labels(), dataset.dim())?;
            TrainedModel::Grouped(fit_ag(dataset, layout.demo_layout())?)
        }
        Algorithm::IbMal => {
            let pool = InstancePool::subsample(
                dataset,
                cfg.pool_size,
                cfg.train.seed,
                cfg.train.l2_normalize,
            )?;
            if cfg.neighbors == 0 || cfg.neighbors > pool.len() {
                return Err(Error::InvalidConfig(format!(
                    "k = {} must be in 1..={}",
                    cfg.neighbors,
                    pool.len()
                )));
            }
            TrainedModel::Knn(KnnRanker {
                pool,
                k: cfg.neighbors,
            })
        }
        Algorithm::Lr => TrainedModel::Lr(fit_lr(dataset, &cfg.train)?),
        Algorithm::PwLr => TrainedModel::Pw(fit_pw(dataset, &cfg.train)?),
    })
}

/// Predictions for every instance, in order.
pub fn predict_all(model: &dyn RankPredictor, dataset: &RankedDataset) -> Result<Vec<Ranking>> {
    if model.num_labels() != dataset.num_labels() {
        return Err(Error::LabelCountMismatch {
            expected: model.num_labels(),
            found: dataset.num_labels(),
        });
    }
    dataset
        .instances()
        .par_iter()
        .map(|inst| model.predict(&inst.features))
        .collect()
}

/// Seeded fold id for each of `n` instances; fold sizes differ by at most 1.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    if folds > n {
        return Err(Error::InvalidConfig(format!(
            "{folds} folds for {n} instances"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % folds;
    }
    Ok(fold)
}

/// Train/test index lists of fold `k`.
pub fn fold_split(assignment: &[usize], k: usize) -> (Vec<usize>, Vec<usize>) {
    (0..assignment.len()).partition(|&i| assignment[i] != k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Candidate λ values; one value skips the inner search.
    pub lambda_grid: Vec<f64>,
    /// Fraction of each training fold held out to pick λ.
    pub holdout_fraction: f64,
    pub base: AlgoConfig,
    pub topk_max: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            seed: 0,
            algorithms: vec![
                Algorithm::AmmRank,
                Algorithm::PwLr,
                Algorithm::Lr,
                Algorithm::AgMal,
                Algorithm::CentralMal,
            ],
            lambda_grid: vec![TrainConfig::default().lambda],
            holdout_fraction: 0.2,
            base: AlgoConfig::default(),
            topk_max: 10,
        }
    }
}

/// Result of one algorithm on one fold.
#[derive(Debug, Clone)]
pub struct FoldResult {
    pub algorithm: Algorithm,
    pub fold: usize,
    pub lambda: Option<f64>,
    pub report: EvalReport,
    /// Weights per class of AMM models.
    pub weights_per_class: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct CvRow {
    pub algorithm: Algorithm,
    pub dis_error: f64,
    pub dis_error_sd: f64,
    pub topk: Vec<TopK>,
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    pub rows: Vec<CvRow>,
}

fn holdout_split(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let held = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let (mut valid, mut train) = (order[..held].to_vec(), order[held..].to_vec());
    valid.sort_unstable();
    train.sort_unstable();
    (train, valid)
}

/// λ from `cfg.lambda_grid` with the lowest disagreement on a held-out part
/// of `train`; the first one wins ties.
pub fn select_lambda(
    algo: Algorithm,
    train_set: &RankedDataset,
    cfg: &CvConfig,
    seed: u64,
) -> Result<f64> {
    let Some(&first) = cfg.lambda_grid.first() else {
        return Err(Error::InvalidConfig("empty lambda grid".into()));
    };
    if cfg.lambda_grid.len() == 1 || !algo.uses_lambda() {
        return Ok(first);
    }
    if train_set.len() < 2 {
        return Err(Error::InvalidConfig(
            "too few instances to hold out a validation set".into(),
        ));
    }
    let (inner, valid) = holdout_split(train_set.len(), cfg.holdout_fraction, seed);
    let (inner, valid) = (train_set.subset(&inner), train_set.subset(&valid));
    let scores = cfg
        .lambda_grid
        .par_iter()
        .map(|&lambda| {
            let mut acfg = cfg.base.clone();
            acfg.train.lambda = lambda;
            let model = train(algo, &inner, &acfg)?;
            let preds = predict_all(model.predictor(), &valid)?;
            crate::metrics::disagreement_error(&preds, &valid.truths(), valid.num_labels())
        })
        .collect::<Result<Vec<f64>>>()?;
    let best = scores
        .iter()
        .enumerate()
        .fold(0, |b, (i, s)| if *s < scores[b] { i } else { b });
    Ok(cfg.lambda_grid[best])
}

/// K-fold comparison of `cfg.algorithms`. Fold/algorithm runs execute in
/// parallel; results do not depend on scheduling.
pub fn cross_validate(dataset: &RankedDataset, cfg: &CvConfig) -> Result<CvReport> {
    if cfg.algorithms.is_empty() {
        return Err(Error::InvalidConfig("no algorithms to compare".into()));
    }
    if cfg.topk_max == 0 || cfg.topk_max > dataset.num_labels() {
        return Err(Error::InvalidConfig(format!(
            "top-K maximum {} out of range 1..={}",
            cfg.topk_max,
            dataset.num_labels()
        )));
    }
    let assignment = fold_assignment(dataset.len(), cfg.folds, cfg.seed)?;
    let jobs: Vec<(usize, Algorithm)> = (0..cfg.folds)
        .flat_map(|k| cfg.algorithms.iter().map(move |&a| (k, a)))
        .collect();
    let folds = jobs
        .par_iter()
        .map(|&(k, algo)| {
            let (train_idx, test_idx) = fold_split(&assignment, k);
            let (train_set, test_set) = (dataset.subset(&train_idx), dataset.subset(&test_idx));
            let fold_seed = cfg.seed.wrapping_add(k as u64 + 1);
            let lambda = select_lambda(algo, &train_set, cfg, fold_seed)?;
            let mut acfg = cfg.base.clone();
            acfg.train.lambda = lambda;
            let model = train(algo, &train_set, &acfg)?;
            let preds = predict_all(model.predictor(), &test_set)?;
            let report = evaluate(
                &preds,
                &test_set.truths(),
                dataset.num_labels(),
                cfg.topk_max,
            )?;
            let weights_per_class = match &model {
                TrainedModel::Amm(m) => {
                    Some((0..m.num_labels()).map(|c| m.num_weights(c)).collect())
                }
                _ => None,
            };
            Ok(FoldResult {
                algorithm: algo,
                fold: k,
                lambda: algo.uses_lambda().then_some(lambda),
                report,
                weights_per_class,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = cfg
        .algorithms
        .iter()
        .map(|&algo| summarize(algo, &folds, cfg.topk_max))
        .collect();
    Ok(CvReport { folds, rows })
}

fn summarize(algo: Algorithm, folds: &[FoldResult], topk_max: usize) -> CvRow {
    let mine: Vec<&FoldResult> = folds.iter().filter(|f| f.algorithm == algo).collect();
    let n = mine.len() as f64;
    let errors: Vec<f64> = mine.iter().map(|f| f.report.dis_error).collect();
    let mean = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let topk = (0..topk_max)
        .map(|i| {
            let avg =
                |f: fn(&TopK) -> f64| mine.iter().map(|r| f(&r.report.topk[i])).sum::<f64>() / n;
            TopK {
                k: i + 1,
                precision: avg(|t| t.precision),
                recall: avg(|t| t.recall),
                f1: avg(|t| t.f1),
            }
        })
        .collect();
    CvRow {
        algorithm: algo,
        dis_error: mean,
        dis_error_sd: var.sqrt(),
        topk,
        lambdas: mine.iter().filter_map(|f| f.lambda).collect(),
    }
}

impl CvReport {
    pub fn row(&self, algo: Algorithm) -> Option<&CvRow> {
        self.rows.iter().find(|r| r.algorithm == algo)
    }

    /// `algorithm,dis_error,dis_error_sd,lambdas`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("algorithm,dis_error,dis_error_sd,lambdas\n");
        for r in &self.rows {
            let lambdas: Vec<String> = r.lambdas.iter().map(|l| format!("{l:?}")).collect();
            writeln!(
                out,
                "{},{:?},{:?},{}",
                r.algorithm,
                r.dis_error,
                r.dis_error_sd,
                lambdas.join(";")
            )
            .unwrap();
        }
        out
    }

    /// `algorithm,K,precision,recall,f1`, fold-averaged.
    pub fn curves_csv(&self) -> String {
        let mut out = String::from("algorithm,K,precision,recall,f1\n");
        for r in &self.rows {
            for t in &r.topk {
                writeln!(
                    out,
                    "{},{},{:?},{:?},{:?}",
                    r.algorithm, t.k, t.precision, t.recall, t.f1
                )
                .unwrap();
            }
        }
        out
    }

    /// Aligned text table.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<12} {:>9} {:>9} {:>8} {:>8} {:>8}\n",
            "algorithm", "dis_error", "sd", "P@1", "R@1", "F1@1"
        );
        for r in &self.rows {
            let t = r.topk[0];
            writeln!(
                out,
                "{:<12} {:>9.4} {:>9.4} {:>8.4} {:>8.4} {:>8.4}",
                r.algorithm.name(),
                r.dis_error,
                r.dis_error_sd,
                t.precision,
                t.recall,
                t.f1
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::linear_ranking_dataset;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("svm".parse::<Algorithm>().is_err());
    }

    #[test]
    fn folds_partition_exactly() {
        let a = fold_assignment(103, 5, 9).unwrap();
        assert_eq!(a, fold_assignment(103, 5, 9).unwrap());
        let mut seen = vec![0; 103];
        for k in 0..5 {
            let (train, test) = fold_split(&a, k);
            assert_eq!(train.len() + test.len(), 103);
            assert!((20..=21).contains(&test.len()));
            for i in test {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&s| s == 1));
        assert!(fold_assignment(10, 1, 0).is_err());
        assert!(fold_assignment(3, 4, 0).is_err());
    }

    #[test]
    fn small_cv_runs() {
        let ds = linear_ranking_dataset(300, 4, 5, 2);
        let cfg = CvConfig {
            folds: 3,
            algorithms: vec![
                Algorithm::AmmRank,
                Algorithm::Lr,
                Algorithm::CentralMal,
                Algorithm::IbMal,
            ],
            lambda_grid: vec![1e-2, 1e-3],
            topk_max: 4,
            ..Default::default()
        };
        let report = cross_validate(&ds, &cfg).unwrap();
        assert_eq!(report.folds.len(), 12);
        assert_eq!(report.row(Algorithm::AmmRank).unwrap().lambdas.len(), 3);
        assert!(report
            .row(Algorithm::CentralMal)
            .unwrap()
            .lambdas
            .is_empty());
        let amm = report.row(Algorithm::AmmRank).unwrap().dis_error;
        let central = report.row(Algorithm::CentralMal).unwrap().dis_error;
        assert!(amm < central, "{amm} vs {central}");
        assert_eq!(report.curves_csv().lines().count(), 1 + 4 * 4);
        let again = cross_validate(&ds, &cfg).unwrap();
        assert_eq!(again.summary_csv(), report.summary_csv());
    }

    #[test]
    fn model_files_dispatch() {
        let ds = linear_ranking_dataset(50, 3, 4, 1);
        for algo in [
            Algorithm::Amm,
            Algorithm::AmmRank,
            Algorithm::CentralMal,
            Algorithm::Lr,
            Algorithm::PwLr,
        ] {
            let model = train(algo, &ds, &AlgoConfig::default()).unwrap();
            let text = model.to_text().unwrap();
            let back = TrainedModel::parse_str(&text).unwrap();
            assert_eq!(back.to_text().unwrap(), text, "{algo}");
        }
        assert!(train(Algorithm::AgMal, &ds, &AlgoConfig::default()).is_err());
        assert!(TrainedModel::parse_str("#svm L=3\n").is_err());
    }
}
