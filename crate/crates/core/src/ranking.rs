//! Label rankings and score-to-ranking conversion.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// An ordered list of distinct labels, most preferred first.
///
/// Labels are 0-based internally. A ranking may be partial: every label it
/// contains is preferred over every label it omits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ranking(Vec<usize>);

impl Ranking {
    /// Validates distinctness, non-emptiness and range.
    pub fn new(labels: Vec<usize>, num_labels: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyRanking);
        }
        let mut seen = vec![false; num_labels];
        for &label in &labels {
            if label >= num_labels {
                return Err(Error::LabelOutOfRange {
                    label: label + 1,
                    num_labels,
                });
            }
            if std::mem::replace(&mut seen[label], true) {
                return Err(Error::DuplicateLabel(label + 1));
            }
        }
        Ok(Ranking(labels))
    }

    /// Builds a ranking from 1-based label ids.
    pub fn from_one_based(labels: &[usize], num_labels: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l == 0) {
            return Err(Error::LabelOutOfRange {
                label: bad,
                num_labels,
            });
        }
        Ranking::new(labels.iter().map(|l| l - 1).collect(), num_labels)
    }

    /// Wraps labels already known to be valid.
    pub(crate) fn from_vec_unchecked(labels: Vec<usize>) -> Self {
        Ranking(labels)
    }

    /// The identity permutation `[0, 1, ..., num_labels - 1]`.
    pub fn identity(num_labels: usize) -> Self {
        Ranking((0..num_labels).collect())
    }

    pub fn labels(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn top(&self) -> usize {
        self.0[0]
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|l| l + 1).collect()
    }

    /// `positions[label]` is the 0-based rank of `label`, or `None` if unranked.
    pub fn positions(&self, num_labels: usize) -> Vec<Option<usize>> {
        let mut pos = vec![None; num_labels];
        for (p, &label) in self.0.iter().enumerate() {
            pos[label] = Some(p);
        }
        pos
    }

    pub fn contains(&self, label: usize) -> bool {
        self.0.contains(&label)
    }

    /// True when the ranking orders all `num_labels` labels.
    pub fn is_full(&self, num_labels: usize) -> bool {
        self.0.len() == num_labels
    }

    /// Reversed order (only meaningful for full rankings).
    pub fn reversed(&self) -> Ranking {
        Ranking(self.0.iter().rev().copied().collect())
    }
}

/// Comma-separated 1-based labels, the format used by the text files.
impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, label) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", label + 1)?;
        }
        Ok(())
    }
}

/// Sorts labels by descending score, breaking ties by ascending label id.
pub fn ranking_from_scores(scores: &[f64]) -> Ranking {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // Stable sort keeps ascending label order among equal scores.
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    Ranking(order)
}
