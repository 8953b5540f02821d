//! Disagreement error and top-K retrieval metrics.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ranking::Ranking;

/// Evaluation summary over a test set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub dis_error: f64,
    pub n_test: usize,
    /// Row `k - 1` holds precision, recall and F1 at `K = k`.
    pub topk: Vec<TopK>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopK {
    pub k: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn check_lengths(preds: &[Ranking], truths: &[Ranking]) -> Result<()> {
    if preds.len() != truths.len() {
        return Err(Error::Invalid(format!(
            "{} predictions for {} truths",
            preds.len(),
            truths.len()
        )));
    }
    Ok(())
}

/// Fraction of ground-truth preference pairs the prediction orders wrongly.
///
/// For an instance with `L_t` ranked labels, the pairs are (ranked label,
/// any label ranked below it or unranked); there are
/// `L_t (L - (L_t + 1) / 2)` of them. Per-instance fractions are averaged.
pub fn disagreement_error(preds: &[Ranking], truths: &[Ranking], num_labels: usize) -> Result<f64> {
    check_lengths(preds, truths)?;
    if preds.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (pred, truth) in preds.iter().zip(truths) {
        total += instance_disagreement(pred, truth, num_labels)?;
    }
    Ok(total / preds.len() as f64)
}

fn instance_disagreement(pred: &Ranking, truth: &Ranking, num_labels: usize) -> Result<f64> {
    if !pred.is_full(num_labels) {
        return Err(Error::Invalid(format!(
            "prediction ranks {} of {num_labels} labels",
            pred.len()
        )));
    }
    let pred_pos = pred.positions(num_labels);
    let truth_pos = truth.positions(num_labels);
    let lt = truth.len() as f64;
    let pairs = lt * (num_labels as f64 - 0.5 * (lt + 1.0));
    if pairs == 0.0 {
        return Ok(0.0);
    }
    let mut wrong = 0usize;
    for (r, &better) in truth.labels().iter().enumerate() {
        let better_pos = pred_pos[better];
        for worse in 0..num_labels {
            if truth_pos[worse].is_none_or(|p| p > r) && better_pos > pred_pos[worse] {
                wrong += 1;
            }
        }
    }
    Ok(wrong as f64 / pairs)
}

/// Precision, recall and F1 at `k`.
///
/// Precision and recall are averaged over instances; F1 is the harmonic
/// mean of those two averages.
pub fn topk_metrics(preds: &[Ranking], truths: &[Ranking], k: usize) -> Result<TopK> {
    check_lengths(preds, truths)?;
    if let Some(short) = preds.iter().find(|p| k == 0 || k > p.len()) {
        return Err(Error::Invalid(format!(
            "K = {k} out of range 1..={}",
            short.len()
        )));
    }
    let n = preds.len().max(1) as f64;
    let (mut precision, mut recall) = (0.0, 0.0);
    for (pred, truth) in preds.iter().zip(truths) {
        let hits = pred.labels()[..k]
            .iter()
            .filter(|&&l| truth.contains(l))
            .count() as f64;
        precision += hits / k as f64;
        recall += hits / truth.len() as f64;
    }
    precision /= n;
    recall /= n;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(TopK {
        k,
        precision,
        recall,
        f1,
    })
}

/// Disagreement error plus the top-K table for `K = 1..=k_max`.
pub fn evaluate(
    preds: &[Ranking],
    truths: &[Ranking],
    num_labels: usize,
    k_max: usize,
) -> Result<EvalReport> {
    if k_max == 0 || k_max > num_labels {
        return Err(Error::Invalid(format!(
            "top-K maximum {k_max} out of range 1..={num_labels}"
        )));
    }
    let dis_error = disagreement_error(preds, truths, num_labels)?;
    let topk = (1..=k_max)
        .map(|k| topk_metrics(preds, truths, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        dis_error,
        n_test: preds.len(),
        topk,
    })
}

impl EvalReport {
    /// Flat `key=value` lines.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        writeln!(out, "n_test={}", self.n_test).unwrap();
        writeln!(out, "dis_error={:?}", self.dis_error).unwrap();
        for row in &self.topk {
            writeln!(out, "precision@{}={:?}", row.k, row.precision).unwrap();
            writeln!(out, "recall@{}={:?}", row.k, row.recall).unwrap();
            writeln!(out, "f1@{}={:?}", row.k, row.f1).unwrap();
        }
        out
    }

    /// `K,precision,recall,f1` table, one row per K.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("K,precision,recall,f1\n");
        for row in &self.topk {
            writeln!(
                out,
                "{},{:?},{:?},{:?}",
                row.k, row.precision, row.recall, row.f1
            )
            .unwrap();
        }
        out
    }
}
