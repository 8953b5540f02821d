//! Central-ranking baselines: one Borda ranking for everyone, or one per
//! age/gender group.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;

use super::aggregate::borda_aggregate;
use crate::dataset::RankedDataset;
use crate::error::{Error, Result};
use crate::ranking::Ranking;
use crate::sparse::SparseVector;
use crate::textio::{parse_index, parse_ranking, read_lines};

pub const AGE_BUCKETS: usize = 9;
pub const GENDERS: usize = 2;

/// Predicts the training set's central ranking for every input.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralRankModel {
    pub central: Ranking,
}

pub fn fit_central(dataset: &RankedDataset) -> Result<CentralRankModel> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(CentralRankModel {
        central: borda_aggregate(&dataset.truths(), dataset.num_labels())?,
    })
}

impl CentralRankModel {
    pub fn predict(&self, _x: &SparseVector) -> Ranking {
        self.central.clone()
    }

    pub fn to_text(&self) -> String {
        format!("#central L={}\n{}\n", self.central.len(), self.central)
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let (header, rows) = read_lines(reader)?;
        header.expect_tag("central")?;
        let num_labels = header.usize("L")?;
        let [(line, text)] = rows.as_slice() else {
            return Err(Error::parse(2, "expected exactly one ranking line"));
        };
        Ok(CentralRankModel {
            central: parse_ranking(text.trim(), num_labels, *line)?,
        })
    }
}

/// 0-based feature indices of the age-bucket and gender one-hots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DemoLayout {
    pub age: [usize; AGE_BUCKETS],
    pub gender: [usize; GENDERS],
}

impl DemoLayout {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let mut all: Vec<usize> = self.age.iter().chain(&self.gender).copied().collect();
        if let Some(&bad) = all.iter().find(|&&i| i >= dim) {
            return Err(Error::Invalid(format!(
                "demographic index {} outside dimension {dim}",
                bad + 1
            )));
        }
        all.sort_unstable();
        all.dedup();
        if all.len() != AGE_BUCKETS + GENDERS {
            return Err(Error::Invalid(
                "demographic indices must be distinct".into(),
            ));
        }
        Ok(())
    }

    /// `(age bucket, gender)` when exactly one of each one-hot is set.
    pub fn group_of(&self, x: &SparseVector) -> Option<(usize, usize)> {
        let single = |idx: &[usize]| {
            let mut set = idx.iter().enumerate().filter(|(_, &i)| x.get(i) != 0.0);
            match (set.next(), set.next()) {
                (Some((k, _)), None) => Some(k),
                _ => None,
            }
        };
        Some((single(&self.age)?, single(&self.gender)?))
    }
}

/// One central ranking per `(age bucket, gender)` group, with the global
/// central ranking as fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedRankModel {
    pub layout: DemoLayout,
    pub groups: BTreeMap<(usize, usize), Ranking>,
    pub fallback: Ranking,
}

pub fn fit_ag(dataset: &RankedDataset, layout: DemoLayout) -> Result<GroupedRankModel> {
    layout.validate(dataset.dim())?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let num_labels = dataset.num_labels();
    let mut members: BTreeMap<(usize, usize), Vec<Ranking>> = BTreeMap::new();
    for inst in dataset.instances() {
        if let Some(g) = layout.group_of(&inst.features) {
            members.entry(g).or_default().push(inst.truth.clone());
        }
    }
    let groups = members
        .into_iter()
        .map(|(g, rankings)| Ok((g, borda_aggregate(&rankings, num_labels)?)))
        .collect::<Result<_>>()?;
    Ok(GroupedRankModel {
        layout,
        groups,
        fallback: borda_aggregate(&dataset.truths(), num_labels)?,
    })
}

impl GroupedRankModel {
    pub fn predict(&self, x: &SparseVector) -> Ranking {
        self.layout
            .group_of(x)
            .and_then(|g| self.groups.get(&g))
            .unwrap_or(&self.fallback)
            .clone()
    }

    /// ```text
    /// #ag L=<L>
    /// layout <9 age indices> <2 gender indices>
    /// fallback <ranking>
    /// group <age 0-8> <gender 0-1> <ranking>
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = format!("#ag L={}\nlayout", self.fallback.len());
        for i in self.layout.age.iter().chain(&self.layout.gender) {
            write!(out, " {}", i + 1).unwrap();
        }
        writeln!(out, "\nfallback {}", self.fallback).unwrap();
        for ((age, gender), r) in &self.groups {
            writeln!(out, "group {age} {gender} {r}").unwrap();
        }
        out
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let (header, rows) = read_lines(reader)?;
        header.expect_tag("ag")?;
        let num_labels = header.usize("L")?;
        let mut layout = None;
        let mut fallback = None;
        let mut groups = BTreeMap::new();
        for (line, text) in rows {
            let tokens: Vec<&str> = text.split_whitespace().collect();
            match tokens.as_slice() {
                ["layout", idx @ ..] if idx.len() == AGE_BUCKETS + GENDERS => {
                    let idx = idx
                        .iter()
                        .map(|t| parse_index(t, usize::MAX, line))
                        .collect::<Result<Vec<_>>>()?;
                    let mut l = DemoLayout {
                        age: [0; AGE_BUCKETS],
                        gender: [0; GENDERS],
                    };
                    l.age.copy_from_slice(&idx[..AGE_BUCKETS]);
                    l.gender.copy_from_slice(&idx[AGE_BUCKETS..]);
                    layout = Some(l);
                }
                ["fallback", r] => fallback = Some(parse_ranking(r, num_labels, line)?),
                ["group", age, gender, r] => {
                    let (age, gender) = match (age.parse::<usize>(), gender.parse::<usize>()) {
                        (Ok(a), Ok(g)) if a < AGE_BUCKETS && g < GENDERS => (a, g),
                        _ => return Err(Error::parse(line, "bad group key")),
                    };
                    groups.insert((age, gender), parse_ranking(r, num_labels, line)?);
                }
                _ => return Err(Error::parse(line, "unrecognized line")),
            }
        }
        Ok(GroupedRankModel {
            layout: layout.ok_or_else(|| Error::parse(1, "missing layout line"))?,
            groups,
            fallback: fallback.ok_or_else(|| Error::parse(1, "missing fallback line"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::RankedInstance;

    fn r(labels: &[usize], l: usize) -> Ranking {
        Ranking::from_one_based(labels, l).unwrap()
    }

    // Features: 2 signal dims followed by 9 age and 2 gender one-hots.
    fn layout() -> DemoLayout {
        DemoLayout {
            age: [2, 3, 4, 5, 6, 7, 8, 9, 10],
            gender: [11, 12],
        }
    }

    fn user(age: Option<usize>, gender: Option<usize>, signal: f64) -> SparseVector {
        let mut pairs = vec![(0, signal)];
        if let Some(a) = age {
            pairs.push((2 + a, 1.0));
        }
        if let Some(g) = gender {
            pairs.push((11 + g, 1.0));
        }
        SparseVector::from_pairs(13, pairs).unwrap()
    }

    fn inst(x: SparseVector, truth: Ranking) -> RankedInstance {
        RankedInstance { features: x, truth }
    }

    #[test]
    fn central_is_constant() {
        let ds = RankedDataset::new(
            3,
            13,
            vec![inst(user(None, None, 1.0), r(&[2, 3, 1], 3)); 4],
        )
        .unwrap();
        let m = fit_central(&ds).unwrap();
        assert_eq!(m.predict(&user(Some(1), Some(0), 5.0)), r(&[2, 3, 1], 3));
        assert_eq!(
            m.predict(&user(None, None, -2.0)),
            m.predict(&user(Some(8), Some(1), 0.0))
        );
        let back = CentralRankModel::read(m.to_text().as_bytes()).unwrap();
        assert_eq!(back, m);
        assert!(fit_central(&RankedDataset::new(3, 13, vec![]).unwrap()).is_err());
    }

    #[test]
    fn one_group_matches_global() {
        let ds = RankedDataset::new(
            3,
            13,
            vec![
                inst(user(Some(3), Some(1), 1.0), r(&[2, 3, 1], 3)),
                inst(user(Some(3), Some(1), 1.0), r(&[1, 2], 3)),
                inst(user(Some(3), Some(1), 1.0), r(&[2], 3)),
            ],
        )
        .unwrap();
        let m = fit_ag(&ds, layout()).unwrap();
        assert_eq!(m.groups.len(), 1);
        assert_eq!(m.groups[&(3, 1)], m.fallback);
    }

    #[test]
    fn fallback_without_demographics() {
        let ds = RankedDataset::new(
            2,
            13,
            vec![
                inst(user(Some(0), Some(0), 1.0), r(&[1, 2], 2)),
                inst(user(Some(0), Some(0), 1.0), r(&[1, 2], 2)),
                inst(user(Some(5), Some(1), 1.0), r(&[2, 1], 2)),
            ],
        )
        .unwrap();
        let m = fit_ag(&ds, layout()).unwrap();
        assert_eq!(m.predict(&user(None, None, 1.0)), m.fallback);
        assert_eq!(m.predict(&user(Some(0), None, 1.0)), m.fallback);
        // Unseen group.
        assert_eq!(m.predict(&user(Some(7), Some(0), 1.0)), m.fallback);
        // Ambiguous: two age one-hots set.
        let pairs = vec![(2, 1.0), (3, 1.0), (11, 1.0)];
        assert_eq!(
            m.predict(&SparseVector::from_pairs(13, pairs).unwrap()),
            m.fallback
        );
    }

    #[test]
    fn opposite_groups_predicted_exactly() {
        let mut rows = Vec::new();
        for _ in 0..5 {
            rows.push(inst(user(Some(1), Some(0), 1.0), r(&[1, 2, 3], 3)));
            rows.push(inst(user(Some(6), Some(1), 1.0), r(&[3, 2, 1], 3)));
        }
        let ds = RankedDataset::new(3, 13, rows).unwrap();
        let m = fit_ag(&ds, layout()).unwrap();
        let preds: Vec<_> = ds
            .instances()
            .iter()
            .map(|i| m.predict(&i.features))
            .collect();
        let e = crate::metrics::disagreement_error(&preds, &ds.truths(), 3).unwrap();
        assert_eq!(e, 0.0);
        let back = GroupedRankModel::read(m.to_text().as_bytes()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn malformed_layout() {
        let ds = RankedDataset::new(2, 13, vec![inst(user(None, None, 1.0), r(&[1], 2))]).unwrap();
        let mut bad = layout();
        bad.gender = [11, 11];
        assert!(fit_ag(&ds, bad).is_err());
        bad.gender = [11, 13];
        assert!(fit_ag(&ds, bad).is_err());
    }
}
