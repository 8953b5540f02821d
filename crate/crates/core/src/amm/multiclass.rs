//! Multiclass AMM trained on the top-ranked label of each instance.

use super::{run_sgd, schedule, AmmModel, TrainConfig, UpdatePlan, WeightSlot};
use crate::dataset::RankedDataset;
use crate::error::{Error, Result};
use crate::sparse::SparseVector;

/// `max(0, 1 + max_{i≠y} g(i,x) - w_{y,z}·x)`. Zero when `L = 1`.
pub fn multiclass_loss(model: &AmmModel, x: &SparseVector, y: usize, z: WeightSlot) -> Result<f64> {
    let own = model.slot_dot(y, z, x)?;
    let best_other = model
        .class_scores(x)?
        .into_iter()
        .enumerate()
        .filter(|&(c, _)| c != y)
        .map(|(_, s)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    if best_other == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok((1.0 + best_other - own).max(0.0))
}

/// Loss and subgradient for one example, with `z` chosen on the fly.
///
/// When the hinge is active the true-class active weight is pulled toward
/// `x` and the active weight of the strongest competitor (lowest label id on
/// ties) is pushed away.
pub fn multiclass_update_plan(model: &AmmModel, x: &SparseVector, y: usize) -> Result<UpdatePlan> {
    if y >= model.num_labels() {
        return Err(Error::LabelOutOfRange {
            label: y + 1,
            num_labels: model.num_labels(),
        });
    }
    let acts = model.activations(x)?;
    Ok(plan_from_activations(&acts, y))
}

fn plan_from_activations(acts: &[super::Activation], y: usize) -> UpdatePlan {
    let mut rival: Option<usize> = None;
    for (c, a) in acts.iter().enumerate() {
        if c != y && rival.is_none_or(|r| a.score > acts[r].score) {
            rival = Some(c);
        }
    }
    let Some(rival) = rival else {
        return UpdatePlan::default();
    };
    let loss = 1.0 + acts[rival].score - acts[y].score;
    if loss <= 0.0 {
        return UpdatePlan::default();
    }
    UpdatePlan {
        loss,
        updates: vec![(y, acts[y].slot, 1.0), (rival, acts[rival].slot, -1.0)],
    }
}

/// One SGD step at iteration `t` (1-based).
pub fn multiclass_sgd_step(
    model: &mut AmmModel,
    x: &SparseVector,
    y: usize,
    t: usize,
    lambda: f64,
) -> Result<()> {
    let plan = multiclass_update_plan(model, x, y)?;
    let (shrink, eta) = schedule(t.max(1), lambda);
    model.shrink(shrink);
    plan.apply(model, x, eta);
    Ok(())
}

/// Trains on `y_t = π_t[1]` for every instance.
pub fn train_multiclass(dataset: &RankedDataset, cfg: &TrainConfig) -> Result<AmmModel> {
    run_sgd(dataset, cfg, |model, x, truth, t| {
        let acts: Vec<_> = (0..model.num_labels())
            .map(|c| model.activation_unchecked(c, x))
            .collect();
        let plan = plan_from_activations(&acts, truth.top());
        let (shrink, eta) = schedule(t, cfg.lambda);
        model.shrink(shrink);
        plan.apply(model, x, eta);
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::RankedInstance;
    use crate::ranking::Ranking;

    fn x(v: &[f64]) -> SparseVector {
        SparseVector::from_dense(v)
    }

    #[test]
    fn loss_examples() {
        let empty = AmmModel::new(3, 2, 20);
        assert_eq!(
            multiclass_loss(&empty, &x(&[1.0, 2.0]), 0, WeightSlot::Zero).unwrap(),
            1.0
        );

        // Class 1 (index 0) scores 0.2; true class 2 active dot 1.5 or 0.9.
        let m =
            AmmModel::from_weights(1, vec![vec![vec![0.2]], vec![vec![1.5], vec![0.9]]]).unwrap();
        let xv = x(&[1.0]);
        assert_eq!(
            multiclass_loss(&m, &xv, 1, WeightSlot::Stored(0)).unwrap(),
            0.0
        );
        let l = multiclass_loss(&m, &xv, 1, WeightSlot::Stored(1)).unwrap();
        assert!((l - 0.3).abs() < 1e-12, "{l}");
        assert!(multiclass_loss(&m, &xv, 1, WeightSlot::Stored(5)).is_err());
        assert!(multiclass_loss(&m, &xv, 7, WeightSlot::Zero).is_err());
    }

    #[test]
    fn first_step_from_empty_model() {
        let mut m = AmmModel::new(2, 2, 20);
        multiclass_sgd_step(&mut m, &x(&[1.0, 0.0]), 1, 1, 1.0).unwrap();
        assert_eq!(m.weights(1), vec![vec![1.0, 0.0]]);
        assert_eq!(m.weights(0), vec![vec![-1.0, 0.0]]);
    }

    #[test]
    fn satisfied_margin_only_shrinks() {
        let mut m = AmmModel::from_weights(1, vec![vec![], vec![vec![4.0]]]).unwrap();
        multiclass_sgd_step(&mut m, &x(&[1.0]), 1, 2, 1.0).unwrap();
        assert_eq!(m.weights(1), vec![vec![2.0]]);
        assert_eq!(m.num_weights(0), 0);
    }

    #[test]
    fn competitor_ties_go_to_lowest_label() {
        let m = AmmModel::from_weights(1, vec![vec![vec![1.0]], vec![], vec![vec![1.0]]]).unwrap();
        let plan = multiclass_update_plan(&m, &x(&[1.0]), 1).unwrap();
        assert_eq!(plan.updates[1], (0, WeightSlot::Stored(0), -1.0));
    }

    #[test]
    fn learning_rate_vanishes() {
        let (_, eta_small) = schedule(1_000_000, 1.0);
        assert!(eta_small <= 1e-6);
    }

    fn separable() -> RankedDataset {
        // Label 1 when x1 > 0, label 2 otherwise, with a gap around 0; a
        // constant feature lets the hyperplanes carry an offset.
        let instances = (0..200)
            .map(|i| {
                let v = (i as f64 - 99.5).signum() * (0.2 + (i % 100) as f64 / 50.0);
                let label = if v > 0.0 { 0 } else { 1 };
                RankedInstance {
                    features: x(&[v, 1.0]),
                    truth: Ranking::new(vec![label], 2).unwrap(),
                }
            })
            .collect();
        RankedDataset::new(2, 2, instances).unwrap()
    }

    #[test]
    fn separable_data_is_learned() {
        let ds = separable();
        let cfg = TrainConfig {
            lambda: 1e-3,
            epochs: 5,
            seed: 3,
            ..Default::default()
        };
        let m = train_multiclass(&ds, &cfg).unwrap();
        let correct = ds
            .instances()
            .iter()
            .filter(|i| m.predict_ranking(&i.features).unwrap().top() == i.truth.top())
            .count();
        assert_eq!(correct, ds.len());
    }

    #[test]
    fn deterministic_and_validated() {
        let ds = separable();
        let cfg = TrainConfig {
            lambda: 1e-2,
            seed: 11,
            ..Default::default()
        };
        assert_eq!(
            train_multiclass(&ds, &cfg).unwrap(),
            train_multiclass(&ds, &cfg).unwrap()
        );
        let bad = TrainConfig { epochs: 0, ..cfg };
        assert!(train_multiclass(&ds, &bad).is_err());
        let empty = RankedDataset::new(2, 2, vec![]).unwrap();
        assert!(matches!(
            train_multiclass(&empty, &TrainConfig::default()),
            Err(Error::EmptyDataset)
        ));
    }
}
