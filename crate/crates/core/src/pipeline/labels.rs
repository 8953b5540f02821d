//! Ground-truth rankings from ad clicks in the label window.

use std::collections::BTreeMap;

use super::events::{EventGroup, EventLog};
use super::features::check_alpha;
use crate::error::{Error, Result};
use crate::ranking::{ranking_from_scores, Ranking};

/// Default minimum number of distinct clicked categories.
pub const DEFAULT_MIN_CATEGORIES: usize = 3;

/// Per user, the categories clicked in `(t_features, t_labels]` sorted by
/// decayed click intensity at `t_labels` (ties by category id). Users with
/// fewer than `min_categories` distinct clicked categories are dropped.
pub fn build_labels(
    log: &EventLog,
    t_features: i64,
    t_labels: i64,
    alpha: f64,
    min_categories: usize,
) -> Result<BTreeMap<u64, Ranking>> {
    check_alpha(alpha)?;
    if t_features >= t_labels {
        return Err(Error::InvalidConfig(format!(
            "feature time {t_features} must precede label time {t_labels}"
        )));
    }
    let mut intensities: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for e in &log.events {
        if e.group != EventGroup::Adc || e.timestamp <= t_features || e.timestamp > t_labels {
            continue;
        }
        let row = intensities
            .entry(e.user)
            .or_insert_with(|| vec![0.0; log.num_labels]);
        row[e.category] += alpha.powf((t_labels - e.timestamp) as f64);
    }
    Ok(intensities
        .into_iter()
        .filter_map(|(user, scores)| {
            let clicked = scores.iter().filter(|&&s| s > 0.0).count();
            if clicked < min_categories.max(1) {
                return None;
            }
            let order = ranking_from_scores(&scores);
            let top = Ranking::new(order.labels()[..clicked].to_vec(), log.num_labels)
                .expect("prefix of a permutation is a ranking");
            Some((user, top))
        })
        .collect())
}
