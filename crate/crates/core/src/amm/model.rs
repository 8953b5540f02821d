use crate::error::{Error, Result};
use crate::ranking::{ranking_from_scores, Ranking};
use crate::sparse::SparseVector;

/// Below this the lazy shrink multiplier is folded into the stored weights.
const MIN_SCALE: f64 = 1e-9;

/// Which weight of a class is meant: a stored hyperplane or the implicit
/// zero weight every class carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightSlot {
    Stored(usize),
    Zero,
}

/// The active weight of one class for one input, with its dot product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Activation {
    pub slot: WeightSlot,
    pub score: f64,
}

/// Per-class blocks of dense hyperplanes.
///
/// The score of class `i` is the largest `w·x` over its stored weights and
/// an implicit all-zero weight, so scores are never negative. Effective
/// weights are `scale * stored`; the scalar lets a training step shrink the
/// whole model in O(1).
#[derive(Debug, Clone, PartialEq)]
pub struct AmmModel {
    num_labels: usize,
    dim: usize,
    budget: usize,
    normalize_input: bool,
    classes: Vec<Vec<Vec<f64>>>,
    scale: f64,
}

impl AmmModel {
    /// The zero model: no stored weights, every class scores 0.
    pub fn new(num_labels: usize, dim: usize, max_weights_per_class: usize) -> Self {
        AmmModel {
            num_labels,
            dim,
            budget: max_weights_per_class.max(1),
            normalize_input: false,
            classes: vec![Vec::new(); num_labels],
            scale: 1.0,
        }
    }

    /// Builds a model from literal per-class weights.
    pub fn from_weights(dim: usize, classes: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        for w in classes.iter().flatten() {
            if w.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: w.len(),
                });
            }
        }
        let budget = classes.iter().map(Vec::len).max().unwrap_or(0).max(1);
        Ok(AmmModel {
            num_labels: classes.len(),
            dim,
            budget,
            normalize_input: false,
            classes,
            scale: 1.0,
        })
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_weights_per_class(&self) -> usize {
        self.budget
    }

    pub fn set_max_weights_per_class(&mut self, budget: usize) {
        self.budget = budget.max(1);
    }

    /// Whether inputs are L2-normalized before scoring.
    pub fn normalizes_input(&self) -> bool {
        self.normalize_input
    }

    pub fn set_normalize_input(&mut self, on: bool) {
        self.normalize_input = on;
    }

    /// `b_i`, the number of stored weights of `class`.
    pub fn num_weights(&self, class: usize) -> usize {
        self.classes[class].len()
    }

    pub fn total_weights(&self) -> usize {
        self.classes.iter().map(Vec::len).sum()
    }

    /// Effective (scaled) stored weights of `class`.
    pub fn weights(&self, class: usize) -> Vec<Vec<f64>> {
        self.classes[class]
            .iter()
            .map(|w| w.iter().map(|v| v * self.scale).collect())
            .collect()
    }

    pub fn squared_frobenius_norm(&self) -> f64 {
        let raw: f64 = self
            .classes
            .iter()
            .flatten()
            .flat_map(|w| w.iter())
            .map(|v| v * v)
            .sum();
        raw * self.scale * self.scale
    }

    pub fn check_input(&self, x: &SparseVector) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }

    fn check_class(&self, class: usize) -> Result<()> {
        if class >= self.num_labels {
            return Err(Error::LabelOutOfRange {
                label: class + 1,
                num_labels: self.num_labels,
            });
        }
        Ok(())
    }

    /// `w·x` for a specific slot of `class`.
    pub fn slot_dot(&self, class: usize, slot: WeightSlot, x: &SparseVector) -> Result<f64> {
        self.check_input(x)?;
        self.check_class(class)?;
        match slot {
            WeightSlot::Zero => Ok(0.0),
            WeightSlot::Stored(j) => self.classes[class]
                .get(j)
                .map(|w| self.scale * x.dot_dense(w))
                .ok_or_else(|| {
                    Error::Invalid(format!("class {} has no weight {}", class + 1, j + 1))
                }),
        }
    }

    /// Arg-max weight of `class`; ties go to the lowest stored index, and a
    /// stored weight wins over the zero slot at an exact tie.
    pub(crate) fn activation_unchecked(&self, class: usize, x: &SparseVector) -> Activation {
        let mut best: Option<(usize, f64)> = None;
        for (j, w) in self.classes[class].iter().enumerate() {
            let dot = x.dot_dense(w);
            if best.is_none_or(|(_, b)| dot > b) {
                best = Some((j, dot));
            }
        }
        match best {
            Some((j, raw)) if raw >= 0.0 => Activation {
                slot: WeightSlot::Stored(j),
                score: raw * self.scale,
            },
            _ => Activation {
                slot: WeightSlot::Zero,
                score: 0.0,
            },
        }
    }

    /// Active weights of every class.
    pub fn activations(&self, x: &SparseVector) -> Result<Vec<Activation>> {
        self.check_input(x)?;
        Ok((0..self.num_labels)
            .map(|c| self.activation_unchecked(c, x))
            .collect())
    }

    /// `g(i, x)`: the class score, never below zero.
    pub fn class_score(&self, x: &SparseVector, class: usize) -> Result<f64> {
        self.check_input(x)?;
        self.check_class(class)?;
        Ok(self.activation_unchecked(class, x).score)
    }

    /// Index of the weight of `class` achieving its score on `x`.
    pub fn active_weight_index(&self, x: &SparseVector, class: usize) -> Result<WeightSlot> {
        self.check_input(x)?;
        self.check_class(class)?;
        Ok(self.activation_unchecked(class, x).slot)
    }

    pub fn class_scores(&self, x: &SparseVector) -> Result<Vec<f64>> {
        Ok(self.activations(x)?.into_iter().map(|a| a.score).collect())
    }

    /// Labels sorted by descending class score.
    pub fn predict_ranking(&self, x: &SparseVector) -> Result<Ranking> {
        if self.normalize_input {
            self.check_input(x)?;
            Ok(ranking_from_scores(&self.class_scores(&x.l2_normalized())?))
        } else {
            Ok(ranking_from_scores(&self.class_scores(x)?))
        }
    }

    /// Adds `coef * x` to weight `slot` of `class`.
    ///
    /// Updating the zero slot stores a new weight unless the class is at its
    /// budget. At the budget a positive update goes to the stored weight with
    /// the largest `w·x`, and a negative one is dropped: the zero weight
    /// cannot move, and pushing a real hyperplane down in its place would pin
    /// the class at score zero.
    pub fn promote_or_update(
        &mut self,
        class: usize,
        slot: WeightSlot,
        coef: f64,
        x: &SparseVector,
    ) {
        if coef == 0.0 || x.is_empty() {
            return;
        }
        let raw_coef = coef / self.scale;
        let weights = &mut self.classes[class];
        let target = match slot {
            WeightSlot::Stored(j) => j,
            WeightSlot::Zero if weights.len() < self.budget => {
                let mut w = vec![0.0; self.dim];
                x.add_scaled_to(raw_coef, &mut w);
                weights.push(w);
                return;
            }
            WeightSlot::Zero if coef < 0.0 => return,
            WeightSlot::Zero => {
                let mut best = 0;
                let mut best_dot = f64::NEG_INFINITY;
                for (j, w) in weights.iter().enumerate() {
                    let dot = x.dot_dense(w);
                    if dot > best_dot {
                        best = j;
                        best_dot = dot;
                    }
                }
                best
            }
        };
        x.add_scaled_to(raw_coef, &mut weights[target]);
    }

    /// Multiplies every weight by `factor` in `[0, 1]`.
    pub fn shrink(&mut self, factor: f64) {
        debug_assert!((0.0..=1.0).contains(&factor));
        if factor == 0.0 {
            for w in self.classes.iter_mut().flatten() {
                w.iter_mut().for_each(|v| *v = 0.0);
            }
            self.scale = 1.0;
            return;
        }
        self.scale *= factor;
        if self.scale < MIN_SCALE {
            self.fold_scale();
        }
    }

    /// Folds the shrink multiplier into the stored weights.
    pub fn fold_scale(&mut self) {
        if self.scale != 1.0 {
            let s = self.scale;
            for w in self.classes.iter_mut().flatten() {
                w.iter_mut().for_each(|v| *v *= s);
            }
            self.scale = 1.0;
        }
    }

    /// Removes stored weights with squared norm at or below `threshold`.
    pub fn prune(&mut self, threshold: f64) -> usize {
        self.fold_scale();
        let mut removed = 0;
        for weights in &mut self.classes {
            let before = weights.len();
            weights.retain(|w| w.iter().map(|v| v * v).sum::<f64>() > threshold);
            removed += before - weights.len();
        }
        removed
    }

    /// Folds the multiplier so stored weights are literal.
    pub fn finalize(&mut self) {
        self.fold_scale();
    }

    /// Returns a copy with class `c` renamed to `perm[c]`.
    pub fn relabeled(&self, perm: &[usize]) -> AmmModel {
        let mut classes = vec![Vec::new(); self.num_labels];
        for (c, w) in self.classes.iter().enumerate() {
            classes[perm[c]] = w.clone();
        }
        AmmModel {
            classes,
            ..self.clone()
        }
    }

    pub(crate) fn raw_classes(&self) -> &[Vec<Vec<f64>>] {
        &self.classes
    }

    pub(crate) fn scale(&self) -> f64 {
        self.scale
    }
}
