//! Logistic-regression rankers: one-vs-rest (LR) and pairwise (PW-LR).
//!
//! Every binary model minimizes `λ/2 (‖w‖² + b²) + log(1 + exp(-s m))` with
//! `m = w·x + b` and `s = ±1`, by SGD with the same `1/(λt)` schedule as the
//! AMM trainers. Each binary model keeps its own step counter.

use std::fmt::Write as _;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::amm::TrainConfig;
use crate::dataset::RankedDataset;
use crate::error::{Error, Result};
use crate::ranking::{ranking_from_scores, Ranking};
use crate::sparse::SparseVector;
use crate::textio::{parse_floats, parse_index, push_floats, read_lines};

const MIN_SCALE: f64 = 1e-9;

pub fn sigmoid(m: f64) -> f64 {
    if m >= 0.0 {
        1.0 / (1.0 + (-m).exp())
    } else {
        let e = m.exp();
        e / (1.0 + e)
    }
}

/// L2-regularized logistic model with a lazily applied shrink factor.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryLogistic {
    w: Vec<f64>,
    b: f64,
    scale: f64,
    steps: usize,
}

impl BinaryLogistic {
    pub fn new(dim: usize) -> Self {
        BinaryLogistic {
            w: vec![0.0; dim],
            b: 0.0,
            scale: 1.0,
            steps: 0,
        }
    }

    pub fn from_parts(w: Vec<f64>, b: f64) -> Self {
        BinaryLogistic {
            w,
            b,
            scale: 1.0,
            steps: 0,
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        self.w.iter().map(|v| v * self.scale).collect()
    }

    pub fn bias(&self) -> f64 {
        self.b * self.scale
    }

    /// `w·x + b`.
    pub fn margin(&self, x: &SparseVector) -> f64 {
        self.scale * (x.dot_dense(&self.w) + self.b)
    }

    pub fn probability(&self, x: &SparseVector) -> f64 {
        sigmoid(self.margin(x))
    }

    /// Derivative of the log loss with respect to the margin: `σ(m) - y`.
    pub fn loss_slope(&self, x: &SparseVector, positive: bool) -> f64 {
        self.probability(x) - if positive { 1.0 } else { 0.0 }
    }

    /// Gradient of the regularized objective: `(λw + c x, λb + c)` with
    /// `c = σ(m) - y`.
    pub fn gradient(&self, x: &SparseVector, positive: bool, lambda: f64) -> (Vec<f64>, f64) {
        let c = self.loss_slope(x, positive);
        let mut gw: Vec<f64> = self.weights().into_iter().map(|v| lambda * v).collect();
        x.add_scaled_to(c, &mut gw);
        (gw, lambda * self.bias() + c)
    }

    /// One SGD step; the model's own counter supplies `t`.
    pub fn sgd_step(&mut self, x: &SparseVector, positive: bool, lambda: f64) {
        self.steps += 1;
        let t = self.steps as f64;
        let c = self.loss_slope(x, positive);
        let shrink = 1.0 - 1.0 / t;
        if shrink == 0.0 {
            self.w.iter_mut().for_each(|v| *v = 0.0);
            self.b = 0.0;
            self.scale = 1.0;
        } else {
            self.scale *= shrink;
            if self.scale < MIN_SCALE {
                self.fold();
            }
        }
        let step = -c / (lambda * t) / self.scale;
        x.add_scaled_to(step, &mut self.w);
        self.b += step;
    }

    fn fold(&mut self) {
        let s = self.scale;
        self.w.iter_mut().for_each(|v| *v *= s);
        self.b *= s;
        self.scale = 1.0;
    }
}

/// Shared epoch orders so every binary model sees the same data sequence.
fn epoch_orders(n: usize, cfg: &TrainConfig) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    (0..cfg.epochs)
        .map(|_| {
            order.shuffle(&mut rng);
            order.clone()
        })
        .collect()
}

fn prepared_inputs(dataset: &RankedDataset, normalize: bool) -> Vec<SparseVector> {
    dataset
        .instances()
        .iter()
        .map(|i| {
            if normalize {
                i.features.l2_normalized()
            } else {
                i.features.clone()
            }
        })
        .collect()
}

fn check_fit(dataset: &RankedDataset, cfg: &TrainConfig) -> Result<()> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

fn check_dim(dim: usize, x: &SparseVector) -> Result<()> {
    if x.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: x.dim(),
        });
    }
    Ok(())
}

/// One logistic model per label; positives are instances whose ranking
/// contains the label.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOvrModel {
    pub dim: usize,
    pub normalize: bool,
    pub models: Vec<BinaryLogistic>,
}

pub fn fit_lr(dataset: &RankedDataset, cfg: &TrainConfig) -> Result<LinearOvrModel> {
    check_fit(dataset, cfg)?;
    let inputs = prepared_inputs(dataset, cfg.l2_normalize);
    let orders = epoch_orders(dataset.len(), cfg);
    let models = (0..dataset.num_labels())
        .into_par_iter()
        .map(|label| {
            let mut m = BinaryLogistic::new(dataset.dim());
            for order in &orders {
                for &i in order {
                    let positive = dataset.instances()[i].truth.contains(label);
                    m.sgd_step(&inputs[i], positive, cfg.lambda);
                }
            }
            m.fold();
            m
        })
        .collect();
    Ok(LinearOvrModel {
        dim: dataset.dim(),
        normalize: cfg.l2_normalize,
        models,
    })
}

impl LinearOvrModel {
    pub fn num_labels(&self) -> usize {
        self.models.len()
    }

    /// Raw margins; sorting them equals sorting the probabilities.
    pub fn scores(&self, x: &SparseVector) -> Result<Vec<f64>> {
        check_dim(self.dim, x)?;
        let x = if self.normalize {
            x.l2_normalized()
        } else {
            x.clone()
        };
        Ok(self.models.iter().map(|m| m.margin(&x)).collect())
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Ranking> {
        Ok(ranking_from_scores(&self.scores(x)?))
    }

    /// `#lr L=<L> d=<d> [norm=1]`, then `<label> <bias> <w_1..w_d>` per label.
    pub fn to_text(&self) -> String {
        let mut out = header_line("lr", self.num_labels(), self.dim, self.normalize);
        for (c, m) in self.models.iter().enumerate() {
            write!(out, "{}", c + 1).unwrap();
            push_floats(&mut out, &[m.bias()]);
            push_floats(&mut out, &m.weights());
            out.push('\n');
        }
        out
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let (header, rows) = read_lines(reader)?;
        header.expect_tag("lr")?;
        let (num_labels, dim) = (header.usize("L")?, header.usize("d")?);
        let mut models = vec![None; num_labels];
        for (line, text) in rows {
            let tokens: Vec<&str> = text.split_whitespace().collect();
            let label = parse_index(tokens[0], num_labels, line)?;
            models[label] = Some(parse_binary(&tokens[1..], dim, line)?);
        }
        Ok(LinearOvrModel {
            dim,
            normalize: header.flag("norm"),
            models: collect_all(models, "label")?,
        })
    }
}

/// Index of the unordered pair `(i, j)`, `i < j`, in row-major order.
pub fn pair_index(i: usize, j: usize, num_labels: usize) -> usize {
    debug_assert!(i < j && j < num_labels);
    i * (2 * num_labels - i - 1) / 2 + (j - i - 1)
}

/// Training target of pair `(i, j)` for a ranking: `Some(true)` when `i` is
/// preferred, `Some(false)` when `j` is, `None` when neither is ranked.
pub fn pair_target(positions: &[Option<usize>], i: usize, j: usize) -> Option<bool> {
    match (positions[i], positions[j]) {
        (Some(a), Some(b)) => Some(a < b),
        (Some(_), None) => Some(true),
        (None, Some(_)) => Some(false),
        (None, None) => None,
    }
}

/// One logistic model per label pair `i < j`, predicting `P(i ≻ j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseModel {
    pub num_labels: usize,
    pub dim: usize,
    pub normalize: bool,
    pub models: Vec<BinaryLogistic>,
}

pub fn fit_pw(dataset: &RankedDataset, cfg: &TrainConfig) -> Result<PairwiseModel> {
    check_fit(dataset, cfg)?;
    let num_labels = dataset.num_labels();
    let inputs = prepared_inputs(dataset, cfg.l2_normalize);
    let orders = epoch_orders(dataset.len(), cfg);
    let positions: Vec<Vec<Option<usize>>> = dataset
        .instances()
        .iter()
        .map(|i| i.truth.positions(num_labels))
        .collect();
    let pairs: Vec<(usize, usize)> = (0..num_labels)
        .flat_map(|i| (i + 1..num_labels).map(move |j| (i, j)))
        .collect();
    let models = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut m = BinaryLogistic::new(dataset.dim());
            for order in &orders {
                for &n in order {
                    if let Some(target) = pair_target(&positions[n], i, j) {
                        m.sgd_step(&inputs[n], target, cfg.lambda);
                    }
                }
            }
            m.fold();
            m
        })
        .collect();
    Ok(PairwiseModel {
        num_labels,
        dim: dataset.dim(),
        normalize: cfg.l2_normalize,
        models,
    })
}

impl PairwiseModel {
    /// Soft votes: `p_ij` to `i` and `1 - p_ij` to `j` for every pair.
    pub fn votes(&self, x: &SparseVector) -> Result<Vec<f64>> {
        check_dim(self.dim, x)?;
        let x = if self.normalize {
            x.l2_normalized()
        } else {
            x.clone()
        };
        let probs: Vec<f64> = self.models.iter().map(|m| m.probability(&x)).collect();
        Ok(votes_from_probabilities(&probs, self.num_labels))
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Ranking> {
        Ok(ranking_from_scores(&self.votes(x)?))
    }

    /// `#pw L=<L> d=<d> [norm=1]`, then `<i> <j> <bias> <w_1..w_d>` per pair.
    pub fn to_text(&self) -> String {
        let mut out = header_line("pw", self.num_labels, self.dim, self.normalize);
        for i in 0..self.num_labels {
            for j in i + 1..self.num_labels {
                let m = &self.models[pair_index(i, j, self.num_labels)];
                write!(out, "{} {}", i + 1, j + 1).unwrap();
                push_floats(&mut out, &[m.bias()]);
                push_floats(&mut out, &m.weights());
                out.push('\n');
            }
        }
        out
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let (header, rows) = read_lines(reader)?;
        header.expect_tag("pw")?;
        let (num_labels, dim) = (header.usize("L")?, header.usize("d")?);
        let mut models = vec![None; num_labels * num_labels.saturating_sub(1) / 2];
        for (line, text) in rows {
            let tokens: Vec<&str> = text.split_whitespace().collect();
            if tokens.len() < 2 {
                return Err(Error::parse(line, "expected a label pair"));
            }
            let i = parse_index(tokens[0], num_labels, line)?;
            let j = parse_index(tokens[1], num_labels, line)?;
            if i >= j {
                return Err(Error::parse(line, "pair labels must satisfy i < j"));
            }
            models[pair_index(i, j, num_labels)] = Some(parse_binary(&tokens[2..], dim, line)?);
        }
        Ok(PairwiseModel {
            num_labels,
            dim,
            normalize: header.flag("norm"),
            models: collect_all(models, "pair")?,
        })
    }
}

/// Vote totals from pair probabilities laid out by [`pair_index`].
pub fn votes_from_probabilities(probs: &[f64], num_labels: usize) -> Vec<f64> {
    let mut votes = vec![0.0; num_labels];
    for i in 0..num_labels {
        for j in i + 1..num_labels {
            let p = probs[pair_index(i, j, num_labels)];
            votes[i] += p;
            votes[j] += 1.0 - p;
        }
    }
    votes
}

fn header_line(tag: &str, num_labels: usize, dim: usize, normalize: bool) -> String {
    let mut out = format!("#{tag} L={num_labels} d={dim}");
    if normalize {
        out.push_str(" norm=1");
    }
    out.push('\n');
    out
}

fn parse_binary(tokens: &[&str], dim: usize, line: usize) -> Result<BinaryLogistic> {
    let values = parse_floats(tokens, line)?;
    if values.len() != dim + 1 {
        return Err(Error::parse(
            line,
            format!(
                "expected bias and {dim} weights, found {} numbers",
                values.len()
            ),
        ));
    }
    Ok(BinaryLogistic::from_parts(values[1..].to_vec(), values[0]))
}

fn collect_all(models: Vec<Option<BinaryLogistic>>, what: &str) -> Result<Vec<BinaryLogistic>> {
    models
        .into_iter()
        .enumerate()
        .map(|(k, m)| m.ok_or_else(|| Error::parse(1, format!("missing {what} #{}", k + 1))))
        .collect()
}
