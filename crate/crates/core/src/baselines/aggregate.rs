//! Rank aggregation: Borda count and an exact Kemeny search for small `L`.

use crate::error::{Error, Result};
use crate::ranking::{ranking_from_scores, Ranking};

/// Largest label count `kemeny_exact` accepts.
pub const KEMENY_MAX_LABELS: usize = 10;

/// Borda aggregate of possibly partial rankings.
///
/// A label at 1-based position `p` earns `L - p`. The unranked labels of a
/// partial ranking share the credit of the unoccupied positions equally, so
/// every voter hands out the same total.
pub fn borda_aggregate(rankings: &[Ranking], num_labels: usize) -> Result<Ranking> {
    Ok(ranking_from_scores(&borda_scores(rankings, num_labels)?))
}

/// Borda scores, doubled so that partial-ranking credit stays integral.
pub fn borda_scores(rankings: &[Ranking], num_labels: usize) -> Result<Vec<f64>> {
    let mut credit = vec![0u64; num_labels];
    borda_accumulate(rankings.iter(), num_labels, &mut credit)?;
    Ok(credit.into_iter().map(|c| c as f64).collect())
}

pub(crate) fn borda_accumulate<'a>(
    rankings: impl Iterator<Item = &'a Ranking>,
    num_labels: usize,
    credit: &mut [u64],
) -> Result<()> {
    let l = num_labels as u64;
    let mut ranked = vec![false; num_labels];
    let mut any = false;
    for r in rankings {
        any = true;
        ranked.iter_mut().for_each(|f| *f = false);
        for (p, &label) in r.labels().iter().enumerate() {
            credit[label] += 2 * (l - 1 - p as u64);
            ranked[label] = true;
        }
        if r.len() < num_labels {
            // Average of (L - p) over p = L_t+1..L, doubled: L - L_t - 1.
            let share = l - r.len() as u64 - 1;
            for (label, _) in ranked.iter().enumerate().filter(|(_, &f)| !f) {
                credit[label] += share;
            }
        }
    }
    if !any {
        return Err(Error::Invalid(
            "cannot aggregate an empty set of rankings".into(),
        ));
    }
    Ok(())
}

/// `prefs[a][b]`: how many input rankings prefer `a` over `b`.
pub fn preference_counts(rankings: &[Ranking], num_labels: usize) -> Vec<Vec<u64>> {
    let mut prefs = vec![vec![0u64; num_labels]; num_labels];
    for r in rankings {
        let pos = r.positions(num_labels);
        for (p, &a) in r.labels().iter().enumerate() {
            for b in 0..num_labels {
                if pos[b].is_none_or(|q| q > p) {
                    prefs[a][b] += 1;
                }
            }
        }
    }
    prefs
}

/// Number of input preference pairs a full ranking contradicts.
pub fn total_disagreement(candidate: &Ranking, rankings: &[Ranking], num_labels: usize) -> u64 {
    let prefs = preference_counts(rankings, num_labels);
    let order = candidate.labels();
    let mut cost = 0;
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            cost += prefs[b][a];
        }
    }
    cost
}

/// Full ranking with the fewest contradicted input pairs; the
/// lexicographically smallest among optima.
pub fn kemeny_exact(rankings: &[Ranking], num_labels: usize) -> Result<Ranking> {
    if num_labels > KEMENY_MAX_LABELS {
        return Err(Error::Invalid(format!(
            "exact Kemeny search supports at most {KEMENY_MAX_LABELS} labels, got {num_labels}"
        )));
    }
    if rankings.is_empty() {
        return Err(Error::Invalid(
            "cannot aggregate an empty set of rankings".into(),
        ));
    }
    let prefs = preference_counts(rankings, num_labels);
    let mut search = KemenySearch {
        prefs: &prefs,
        prefix: Vec::with_capacity(num_labels),
        used: vec![false; num_labels],
        best: None,
    };
    search.descend(0);
    let (_, best) = search.best.expect("at least one permutation exists");
    Ok(Ranking::from_vec_unchecked(best))
}

struct KemenySearch<'a> {
    prefs: &'a [Vec<u64>],
    prefix: Vec<usize>,
    used: Vec<bool>,
    best: Option<(u64, Vec<usize>)>,
}

impl KemenySearch<'_> {
    // Labels are tried in increasing order, so the first optimum found is
    // the lexicographically smallest; only strictly better ones replace it.
    fn descend(&mut self, cost: u64) {
        if self.best.as_ref().is_some_and(|(b, _)| cost >= *b) {
            return;
        }
        let n = self.used.len();
        if self.prefix.len() == n {
            self.best = Some((cost, self.prefix.clone()));
            return;
        }
        for next in 0..n {
            if self.used[next] {
                continue;
            }
            // Placing `next` now puts it before every label still unused.
            let added: u64 = (0..n)
                .filter(|&o| !self.used[o] && o != next)
                .map(|o| self.prefs[o][next])
                .sum();
            self.used[next] = true;
            self.prefix.push(next);
            self.descend(cost + added);
            self.prefix.pop();
            self.used[next] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(labels: &[usize], l: usize) -> Ranking {
        Ranking::from_one_based(labels, l).unwrap()
    }

    #[test]
    fn borda_examples() {
        let unanimous = vec![r(&[2, 1, 3], 3); 5];
        assert_eq!(borda_aggregate(&unanimous, 3).unwrap(), r(&[2, 1, 3], 3));
        let votes = vec![r(&[1, 2], 2), r(&[1, 2], 2), r(&[2, 1], 2)];
        assert_eq!(borda_aggregate(&votes, 2).unwrap(), r(&[1, 2], 2));
        assert_eq!(borda_aggregate(&[r(&[3], 3)], 3).unwrap(), r(&[3, 1, 2], 3));
        assert!(borda_aggregate(&[], 3).is_err());
    }

    #[test]
    fn borda_credit_is_constant_per_voter() {
        // Doubled totals: L(L-1) = 12 for L = 4, whatever the ranking length.
        for labels in [&[1][..], &[2, 4], &[3, 1, 2], &[4, 3, 2, 1]] {
            let s = borda_scores(&[r(labels, 4)], 4).unwrap();
            assert_eq!(s.iter().sum::<f64>(), 12.0, "{labels:?}");
        }
        // One unranked label among four gets the last position's credit.
        assert_eq!(
            borda_scores(&[r(&[4, 3, 2], 4)], 4).unwrap(),
            vec![0.0, 2.0, 4.0, 6.0]
        );
    }

    #[test]
    fn kemeny_examples() {
        assert_eq!(
            kemeny_exact(&[r(&[3, 1, 2], 3)], 3).unwrap(),
            r(&[3, 1, 2], 3)
        );
        assert_eq!(
            kemeny_exact(&[r(&[1, 2], 2), r(&[2, 1], 2)], 2).unwrap(),
            r(&[1, 2], 2)
        );
        // Ranked labels beat unranked ones, so these three votes are the
        // full rotations 123, 231, 312 and every permutation contradicts at
        // least 4 pairs.
        let cycle = vec![r(&[1, 2], 3), r(&[2, 3], 3), r(&[3, 1], 3)];
        let best = kemeny_exact(&cycle, 3).unwrap();
        assert_eq!(total_disagreement(&best, &cycle, 3), 4);
        assert!(kemeny_exact(&cycle, 11).is_err());
    }

    #[test]
    fn kemeny_matches_enumeration_on_cycle() {
        let cycle = vec![r(&[1, 2], 3), r(&[2, 3], 3), r(&[3, 1], 3)];
        let perms = [
            [1, 2, 3],
            [1, 3, 2],
            [2, 1, 3],
            [2, 3, 1],
            [3, 1, 2],
            [3, 2, 1],
        ];
        let min = perms
            .iter()
            .map(|p| total_disagreement(&r(p, 3), &cycle, 3))
            .min()
            .unwrap();
        assert_eq!(min, 4);
        let first = perms
            .iter()
            .find(|p| total_disagreement(&r(*p, 3), &cycle, 3) == min)
            .unwrap();
        assert_eq!(kemeny_exact(&cycle, 3).unwrap(), r(first, 3));
    }
}
