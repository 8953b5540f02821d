//! Adaptive multi-hyperplane models and their SGD trainers.
//!
//! [`AmmModel`] holds a variable number of hyperplanes per class. The
//! multiclass trainer fits it to the top-ranked label of each instance; the
//! rank trainer fits it to whole (possibly partial) rankings with a pairwise
//! hinge loss. Both follow the same schedule: at step `t` every weight is
//! shrunk by `1 - 1/t`, then the active weights move by `η = 1/(λt)` times
//! the input.

mod config;
mod io;
mod model;
pub mod multiclass;
pub mod rank;

pub use config::{NuMode, PrunePeriod, TrainConfig};
pub use model::{Activation, AmmModel, WeightSlot};
pub use multiclass::train_multiclass;
pub use rank::train_rank;

use std::borrow::Cow;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::RankedDataset;
use crate::error::{Error, Result};
use crate::ranking::Ranking;
use crate::sparse::SparseVector;

/// Loss subgradient of one example, as coefficients on `x`.
///
/// Each entry `(class, slot, c)` contributes `-c * x` to the gradient of the
/// instantaneous loss with respect to that weight; an SGD step therefore adds
/// `η * c * x`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UpdatePlan {
    pub loss: f64,
    pub updates: Vec<(usize, WeightSlot, f64)>,
}

impl UpdatePlan {
    pub(crate) fn apply(&self, model: &mut AmmModel, x: &SparseVector, eta: f64) {
        for &(class, slot, coef) in &self.updates {
            model.promote_or_update(class, slot, eta * coef, x);
        }
    }
}

/// Runs seeded, shuffled SGD epochs with a global step counter.
pub(crate) fn run_sgd<F>(
    dataset: &RankedDataset,
    cfg: &TrainConfig,
    mut step: F,
) -> Result<AmmModel>
where
    F: FnMut(&mut AmmModel, &SparseVector, &Ranking, usize),
{
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let inputs: Vec<Cow<'_, SparseVector>> = dataset
        .instances()
        .iter()
        .map(|inst| {
            if cfg.l2_normalize {
                Cow::Owned(inst.features.l2_normalized())
            } else {
                Cow::Borrowed(&inst.features)
            }
        })
        .collect();

    let mut model = AmmModel::new(
        dataset.num_labels(),
        dataset.dim(),
        cfg.max_weights_per_class,
    );
    model.set_normalize_input(cfg.l2_normalize);
    let prune_every = cfg.prune_period.steps(dataset.dim());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut t = 0usize;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            step(&mut model, &inputs[i], &dataset.instances()[i].truth, t);
            if prune_every.is_some_and(|p| t.is_multiple_of(p)) {
                model.prune(cfg.prune_threshold);
            }
        }
    }
    model.finalize();
    Ok(model)
}

/// Shrink factor and learning rate of step `t`.
pub(crate) fn schedule(t: usize, lambda: f64) -> (f64, f64) {
    let t = t as f64;
    (1.0 - 1.0 / t, 1.0 / (lambda * t))
}
