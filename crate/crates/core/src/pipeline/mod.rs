//! Event-log featurization, label construction and synthetic data.

pub mod events;
pub mod features;
pub mod labels;
mod linear;
pub mod synth;

pub use events::{Demographic, Demographics, EventGroup, EventLog, EventTuple};
pub use features::{featurize, intensity, recency_feature, FeatureLayout, DEFAULT_ALPHA};
pub use labels::{build_labels, DEFAULT_MIN_CATEGORIES};
pub use linear::linear_ranking_dataset;
pub use synth::{generate_synthetic, SyntheticConfig};

use crate::dataset::{RankedDataset, RankedInstance};
use crate::error::Result;

/// Settings that turn an event log into a ranked dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub t_features: i64,
    pub t_labels: i64,
    pub alpha: f64,
    pub min_categories: usize,
    pub include_adv: bool,
    pub normalize: bool,
}

impl PipelineConfig {
    pub fn new(t_features: i64, t_labels: i64) -> Self {
        PipelineConfig {
            t_features,
            t_labels,
            alpha: DEFAULT_ALPHA,
            min_categories: DEFAULT_MIN_CATEGORIES,
            include_adv: false,
            normalize: true,
        }
    }
}

/// Labels every qualifying user and featurizes them at `t_features`.
/// Instances are ordered by user id, which is returned alongside.
pub fn build_dataset(
    log: &EventLog,
    demographics: &Demographics,
    cfg: &PipelineConfig,
) -> Result<(RankedDataset, Vec<u64>)> {
    let labels = build_labels(
        log,
        cfg.t_features,
        cfg.t_labels,
        cfg.alpha,
        cfg.min_categories,
    )?;
    let layout = FeatureLayout::new(log.num_labels, cfg.include_adv);
    let users: Vec<u64> = labels.keys().copied().collect();
    let features = featurize(
        log,
        demographics,
        &users,
        &layout,
        cfg.t_features,
        cfg.alpha,
        cfg.normalize,
    )?;
    let instances = features
        .into_iter()
        .zip(labels.into_values())
        .map(|(features, truth)| RankedInstance { features, truth })
        .collect();
    Ok((
        RankedDataset::new(log.num_labels, layout.dim(), instances)?,
        users,
    ))
}
