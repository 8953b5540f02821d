//! AMM-rank: the multi-hyperplane model trained directly on label rankings.
//!
//! For an instance with (possibly partial) ranking `π`, every label ranked
//! at position `i` must beat each worse label `j` (ranked lower, or not
//! ranked at all) by a margin of one:
//!
//! ```text
//! loss = Σ_i ν(i) Σ_{j : π_i ≻ j} max(0, 1 + g(j, x) - w_{π_i, z_{π_i}}·x)
//! ```
//!
//! where `z` picks the active (arg-max) weight of each label. A step pulls
//! the active weight of each preferred label toward `x` once per violated
//! pair, weighted by the `ν` of its own rank, and pushes the active weight of
//! each worse label away, weighted by the `ν` of the preferred label's rank.

use super::{run_sgd, schedule, Activation, AmmModel, NuMode, TrainConfig, UpdatePlan, WeightSlot};
use crate::dataset::RankedDataset;
use crate::error::{Error, Result};
use crate::ranking::Ranking;
use crate::sparse::SparseVector;

/// Importance of 1-based rank position `i`.
pub fn nu(i: usize, mode: NuMode) -> f64 {
    debug_assert!(i >= 1);
    match mode {
        NuMode::Constant => 1.0,
        NuMode::InverseRank => 1.0 / i as f64,
    }
}

/// One weight slot per label, naming the weight used for that label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveIndexVector(pub Vec<WeightSlot>);

impl ActiveIndexVector {
    /// The arg-max weight of every label for `x`.
    pub fn compute(model: &AmmModel, x: &SparseVector) -> Result<Self> {
        Ok(ActiveIndexVector(
            model.activations(x)?.into_iter().map(|a| a.slot).collect(),
        ))
    }

    fn validate(&self, model: &AmmModel) -> Result<()> {
        if self.0.len() != model.num_labels() {
            return Err(Error::LabelCountMismatch {
                expected: model.num_labels(),
                found: self.0.len(),
            });
        }
        for (c, slot) in self.0.iter().enumerate() {
            if let WeightSlot::Stored(j) = *slot {
                if j >= model.num_weights(c) {
                    return Err(Error::Invalid(format!(
                        "class {} has no weight {}",
                        c + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_ranking(model: &AmmModel, pi: &Ranking) -> Result<()> {
    Ranking::new(pi.labels().to_vec(), model.num_labels()).map(|_| ())
}

/// The ν-weighted pairwise rank hinge loss, using `z` for preferred labels
/// and the full class score `g` for worse labels.
pub fn rank_loss(
    model: &AmmModel,
    x: &SparseVector,
    pi: &Ranking,
    z: &ActiveIndexVector,
    mode: NuMode,
) -> Result<f64> {
    check_ranking(model, pi)?;
    z.validate(model)?;
    let scores = model.class_scores(x)?;
    let positions = pi.positions(model.num_labels());
    let mut loss = 0.0;
    for (r, &better) in pi.labels().iter().enumerate() {
        let own = model.slot_dot(better, z.0[better], x)?;
        let weight = nu(r + 1, mode);
        for (worse, &g) in scores.iter().enumerate() {
            if positions[worse].is_none_or(|p| p > r) {
                loss += weight * (1.0 + g - own).max(0.0);
            }
        }
    }
    Ok(loss)
}

/// Loss and subgradient for one example with on-the-fly `z`.
///
/// All indicators come from the pre-update scores, and each label gets a
/// single net coefficient on its active weight, so one step touches at most
/// `L` weights.
pub fn rank_update_plan(
    model: &AmmModel,
    x: &SparseVector,
    pi: &Ranking,
    mode: NuMode,
) -> Result<UpdatePlan> {
    check_ranking(model, pi)?;
    let acts = model.activations(x)?;
    let mut coefs = vec![0.0; model.num_labels()];
    let mut positions = vec![None; model.num_labels()];
    let loss = accumulate_rank_pairs(&acts, pi, mode, &mut coefs, &mut positions);
    Ok(plan_from_coefs(&acts, &coefs, loss))
}

fn accumulate_rank_pairs(
    acts: &[Activation],
    pi: &Ranking,
    mode: NuMode,
    coefs: &mut [f64],
    positions: &mut [Option<usize>],
) -> f64 {
    positions.iter_mut().for_each(|p| *p = None);
    for (r, &label) in pi.labels().iter().enumerate() {
        positions[label] = Some(r);
    }
    let mut loss = 0.0;
    for (r, &better) in pi.labels().iter().enumerate() {
        let own = acts[better].score;
        let weight = nu(r + 1, mode);
        for (worse, act) in acts.iter().enumerate() {
            if positions[worse].is_some_and(|p| p <= r) {
                continue;
            }
            let hinge = 1.0 + act.score - own;
            if hinge > 0.0 {
                loss += weight * hinge;
                coefs[better] += weight;
                coefs[worse] -= weight;
            }
        }
    }
    loss
}

fn plan_from_coefs(acts: &[Activation], coefs: &[f64], loss: f64) -> UpdatePlan {
    UpdatePlan {
        loss,
        updates: coefs
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c != 0.0)
            .map(|(label, &c)| (label, acts[label].slot, c))
            .collect(),
    }
}

/// One SGD step at iteration `t` (1-based).
pub fn rank_sgd_step(
    model: &mut AmmModel,
    x: &SparseVector,
    pi: &Ranking,
    t: usize,
    lambda: f64,
    mode: NuMode,
) -> Result<()> {
    let plan = rank_update_plan(model, x, pi, mode)?;
    let (shrink, eta) = schedule(t.max(1), lambda);
    model.shrink(shrink);
    plan.apply(model, x, eta);
    Ok(())
}

/// Trains AMM-rank on every instance's full ranking.
pub fn train_rank(dataset: &RankedDataset, cfg: &TrainConfig) -> Result<AmmModel> {
    let num_labels = dataset.num_labels();
    let mut acts = Vec::with_capacity(num_labels);
    let mut coefs = vec![0.0; num_labels];
    let mut positions = vec![None; num_labels];
    run_sgd(dataset, cfg, |model, x, pi, t| {
        acts.clear();
        acts.extend((0..num_labels).map(|c| model.activation_unchecked(c, x)));
        coefs.iter_mut().for_each(|c| *c = 0.0);
        let loss = accumulate_rank_pairs(&acts, pi, cfg.nu_mode, &mut coefs, &mut positions);
        let plan = plan_from_coefs(&acts, &coefs, loss);
        let (shrink, eta) = schedule(t, cfg.lambda);
        model.shrink(shrink);
        plan.apply(model, x, eta);
    })
}
