//! Intensity/recency featurization of per-user event histories.

use rayon::prelude::*;

use super::events::{
    Demographic, Demographics, EventGroup, EventLog, EventTuple, AGE_BUCKETS, GENDERS,
};
use crate::baselines::DemoLayout;
use crate::error::{Error, Result};
use crate::sparse::SparseVector;

/// Default per-time-unit decay.
pub const DEFAULT_ALPHA: f64 = 0.98;

const BASE_GROUPS: [EventGroup; 4] = [
    EventGroup::Pv,
    EventGroup::Sq,
    EventGroup::Slc,
    EventGroup::Olc,
];
const ADV_GROUPS: [EventGroup; 5] = [
    EventGroup::Pv,
    EventGroup::Sq,
    EventGroup::Slc,
    EventGroup::Olc,
    EventGroup::Adv,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Intensity,
    Recency,
}

/// What a feature index stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSlot {
    Event {
        group: EventGroup,
        kind: FeatureKind,
        category: usize,
    },
    Age(usize),
    Gender(usize),
}

/// Feature index map. Per feature group, `L` intensities then `L`
/// recencies; then 9 age and 2 gender one-hots. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureLayout {
    pub num_labels: usize,
    pub include_adv: bool,
}

impl FeatureLayout {
    pub fn new(num_labels: usize, include_adv: bool) -> Self {
        FeatureLayout {
            num_labels,
            include_adv,
        }
    }

    /// The layout whose dimension is `dim`, if any.
    pub fn infer(num_labels: usize, dim: usize) -> Result<Self> {
        [false, true]
            .into_iter()
            .map(|adv| FeatureLayout::new(num_labels, adv))
            .find(|l| l.dim() == dim)
            .ok_or_else(|| {
                Error::Invalid(format!(
                    "dimension {dim} matches no feature layout for {num_labels} labels"
                ))
            })
    }

    pub fn groups(&self) -> &'static [EventGroup] {
        if self.include_adv {
            &ADV_GROUPS
        } else {
            &BASE_GROUPS
        }
    }

    fn demo_offset(&self) -> usize {
        2 * self.groups().len() * self.num_labels
    }

    pub fn dim(&self) -> usize {
        self.demo_offset() + AGE_BUCKETS + GENDERS
    }

    pub fn index(&self, group: EventGroup, kind: FeatureKind, category: usize) -> Option<usize> {
        let g = self.groups().iter().position(|&x| x == group)?;
        if category >= self.num_labels {
            return None;
        }
        let k = match kind {
            FeatureKind::Intensity => 0,
            FeatureKind::Recency => 1,
        };
        Some((2 * g + k) * self.num_labels + category)
    }

    pub fn age_index(&self, age: usize) -> usize {
        self.demo_offset() + age
    }

    pub fn gender_index(&self, gender: usize) -> usize {
        self.demo_offset() + AGE_BUCKETS + gender
    }

    pub fn decode(&self, index: usize) -> Option<FeatureSlot> {
        let off = self.demo_offset();
        if index < off {
            let l = self.num_labels;
            let block = index / l;
            let kind = if block.is_multiple_of(2) {
                FeatureKind::Intensity
            } else {
                FeatureKind::Recency
            };
            Some(FeatureSlot::Event {
                group: self.groups()[block / 2],
                kind,
                category: index % l,
            })
        } else if index < off + AGE_BUCKETS {
            Some(FeatureSlot::Age(index - off))
        } else if index < self.dim() {
            Some(FeatureSlot::Gender(index - off - AGE_BUCKETS))
        } else {
            None
        }
    }

    pub fn demo_layout(&self) -> DemoLayout {
        DemoLayout {
            age: std::array::from_fn(|a| self.age_index(a)),
            gender: std::array::from_fn(|g| self.gender_index(g)),
        }
    }
}

/// `Σ α^(t - t_i)` over the timestamps; ones after `t` are ignored.
pub fn intensity(timestamps: &[i64], t: i64, alpha: f64) -> f64 {
    timestamps
        .iter()
        .filter(|&&ti| ti <= t)
        .map(|&ti| alpha.powf((t - ti) as f64))
        .sum()
}

/// `α^r` with `r` the time since the latest timestamp at or before `t`;
/// 0 when there is none.
pub fn recency_feature(timestamps: &[i64], t: i64, alpha: f64) -> f64 {
    timestamps
        .iter()
        .filter(|&&ti| ti <= t)
        .max()
        .map_or(0.0, |&last| alpha.powf((t - last) as f64))
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// Feature vector of one user at time `t_features`.
pub fn featurize_user(
    events: &[EventTuple],
    demographic: Option<Demographic>,
    layout: &FeatureLayout,
    t_features: i64,
    alpha: f64,
    normalize: bool,
) -> SparseVector {
    let l = layout.num_labels;
    let cells = layout.groups().len() * l;
    let mut sums = vec![0.0; cells];
    let mut latest: Vec<Option<i64>> = vec![None; cells];
    for e in events.iter().filter(|e| e.timestamp <= t_features) {
        let Some(g) = layout.groups().iter().position(|&x| x == e.group) else {
            continue;
        };
        let cell = g * l + e.category;
        sums[cell] += alpha.powf((t_features - e.timestamp) as f64);
        latest[cell] = Some(latest[cell].map_or(e.timestamp, |p| p.max(e.timestamp)));
    }
    let mut pairs = Vec::new();
    for cell in 0..cells {
        if let Some(last) = latest[cell] {
            let (g, c) = (cell / l, cell % l);
            pairs.push((2 * g * l + c, sums[cell]));
            pairs.push(((2 * g + 1) * l + c, alpha.powf((t_features - last) as f64)));
        }
    }
    if let Some(d) = demographic {
        pairs.push((layout.age_index(d.age), 1.0));
        pairs.push((layout.gender_index(d.gender), 1.0));
    }
    let x = SparseVector::from_pairs(layout.dim(), pairs)
        .expect("layout indices are in range and distinct");
    if normalize {
        x.l2_normalized()
    } else {
        x
    }
}

/// Features of the given users, in the given order; users are processed in
/// parallel.
pub fn featurize(
    log: &EventLog,
    demographics: &Demographics,
    users: &[u64],
    layout: &FeatureLayout,
    t_features: i64,
    alpha: f64,
    normalize: bool,
) -> Result<Vec<SparseVector>> {
    check_alpha(alpha)?;
    if log.num_labels != layout.num_labels {
        return Err(Error::LabelCountMismatch {
            expected: layout.num_labels,
            found: log.num_labels,
        });
    }
    let by_user = log.by_user();
    Ok(users
        .par_iter()
        .map(|u| {
            let events = by_user.get(u).map_or(&[][..], Vec::as_slice);
            featurize_user(
                events,
                demographics.get(*u),
                layout,
                t_features,
                alpha,
                normalize,
            )
        })
        .collect())
}
