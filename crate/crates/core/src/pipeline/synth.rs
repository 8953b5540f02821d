//! Seeded synthetic event logs with prototype-dependent click behaviour.
//!
//! Each user belongs to one of `n_prototypes` latent prototypes. Prototypes
//! carry a binary code; bit `j` switches on browsing interest in the
//! categories of "axis" `j`. Click affinities mix a global popularity term,
//! a per-prototype random term, and a term whose sign is the parity of the
//! code, which no linear function of browsing behaviour can express. On top
//! of that, users click more in categories they browsed recently
//! (time-decayed by `alpha`).

use std::collections::BTreeMap;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, Poisson, StandardNormal};
use rayon::prelude::*;

use super::events::{Demographic, Demographics, EventGroup, EventLog, EventTuple, AGE_BUCKETS};
use super::features::check_alpha;
use crate::error::{Error, Result};

const BROWSE_STRENGTH: f64 = 2.0;
const PERSONAL_SD: f64 = 0.7;
const PARITY_STRENGTH: f64 = 1.5;
const PROTOTYPE_STRENGTH: f64 = 0.7;
const POPULARITY_STRENGTH: f64 = 0.7;
const RECENT_WEIGHT: f64 = 1.0;
const BROWSE_EVENTS: f64 = 60.0;
const CLICK_EVENTS: f64 = 40.0;
const AD_VIEW_EVENTS: f64 = 20.0;
const DEMOGRAPHIC_RATE: f64 = 0.95;
const DEMOGRAPHIC_SIGNAL: f64 = 0.3;
const BROWSE_GROUPS: [(EventGroup, f64); 4] = [
    (EventGroup::Pv, 0.5),
    (EventGroup::Sq, 0.2),
    (EventGroup::Slc, 0.15),
    (EventGroup::Olc, 0.15),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_users: usize,
    pub num_labels: usize,
    /// Decay of the recent-browsing effect on clicks, per time unit.
    pub alpha: f64,
    /// Timestamps are drawn uniformly from `0..horizon`.
    pub horizon: i64,
    pub n_prototypes: usize,
    /// Sampling temperature; large values flatten every preference.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_users: 10_000,
            num_labels: 20,
            alpha: super::features::DEFAULT_ALPHA,
            horizon: 120,
            n_prototypes: 4,
            noise: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.n_users == 0 || self.num_labels == 0 || self.n_prototypes == 0 {
            return Err(Error::InvalidConfig(
                "users, labels and prototypes must all be at least 1".into(),
            ));
        }
        if self.horizon < 2 {
            return Err(Error::InvalidConfig("horizon must be at least 2".into()));
        }
        if !(self.noise > 0.0 && self.noise.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise must be positive, got {}",
                self.noise
            )));
        }
        Ok(())
    }

    /// Feature and label times that leave the last quarter of the horizon
    /// as the label window.
    pub fn default_times(&self) -> (i64, i64) {
        (self.horizon - (self.horizon / 4).max(1), self.horizon)
    }
}

/// Prototype-level parameters shared by all users.
struct World {
    browse: Vec<Vec<f64>>,
    click: Vec<Vec<f64>>,
}

fn code_bits(n_prototypes: usize) -> usize {
    (usize::BITS - (n_prototypes - 1).leading_zeros()) as usize
}

impl World {
    fn new(cfg: &SyntheticConfig) -> World {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(u64::MAX);
        let l = cfg.num_labels;
        let bits = code_bits(cfg.n_prototypes);
        let mut normals =
            |n: usize| -> Vec<f64> { (0..n).map(|_| rng.sample(StandardNormal)).collect() };
        let popularity = normals(l);
        let parity_pattern = normals(l);
        let mut browse = Vec::new();
        let mut click = Vec::new();
        for p in 0..cfg.n_prototypes {
            let axis_on = |c: usize| {
                let axis = c % (bits + 1);
                axis < bits && (p >> axis) & 1 == 1
            };
            browse.push(
                (0..l)
                    .map(|c| if axis_on(c) { BROWSE_STRENGTH } else { 0.0 })
                    .collect(),
            );
            let sign = if p.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
            let own = normals(l);
            click.push(
                (0..l)
                    .map(|c| {
                        POPULARITY_STRENGTH * popularity[c]
                            + PARITY_STRENGTH * sign * parity_pattern[c]
                            + PROTOTYPE_STRENGTH * own[c]
                    })
                    .collect(),
            );
        }
        World { browse, click }
    }
}

fn softmax_sampler(logits: &[f64], temperature: f64) -> WeightedIndex<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits
        .iter()
        .map(|v| ((v - max) / temperature).exp())
        .collect();
    WeightedIndex::new(weights).expect("softmax weights are positive")
}

fn count(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    Poisson::new(mean).expect("positive mean").sample(rng) as usize
}

fn generate_user(
    cfg: &SyntheticConfig,
    world: &World,
    index: usize,
) -> (Vec<EventTuple>, Option<Demographic>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let user = index as u64 + 1;
    let l = cfg.num_labels;
    let prototype = rng.random_range(0..cfg.n_prototypes);
    let personal = Normal::new(0.0, PERSONAL_SD).expect("valid sd");
    let browse_logits: Vec<f64> = world.browse[prototype]
        .iter()
        .map(|b| b + personal.sample(&mut rng))
        .collect();
    let browse_cat = softmax_sampler(&browse_logits, cfg.noise);
    let group_pick =
        WeightedIndex::new(BROWSE_GROUPS.iter().map(|g| g.1)).expect("positive weights");

    let mut events = Vec::new();
    for _ in 0..count(&mut rng, BROWSE_EVENTS) {
        events.push(EventTuple {
            user,
            timestamp: rng.random_range(0..cfg.horizon),
            group: BROWSE_GROUPS[group_pick.sample(&mut rng)].0,
            category: browse_cat.sample(&mut rng),
        });
    }
    events.sort_unstable();

    let ad_view_cat = softmax_sampler(&world.click[prototype], cfg.noise * 2.0);
    for _ in 0..count(&mut rng, AD_VIEW_EVENTS) {
        events.push(EventTuple {
            user,
            timestamp: rng.random_range(0..cfg.horizon),
            group: EventGroup::Adv,
            category: ad_view_cat.sample(&mut rng),
        });
    }

    let mut click_times: Vec<i64> = (0..count(&mut rng, CLICK_EVENTS))
        .map(|_| rng.random_range(0..cfg.horizon))
        .collect();
    click_times.sort_unstable();
    // Decayed browse intensity per category, advanced to each click time.
    let browse_events: Vec<(i64, usize)> = events
        .iter()
        .filter(|e| e.group != EventGroup::Adv)
        .map(|e| (e.timestamp, e.category))
        .collect();
    let mut recent = vec![0.0; l];
    let mut now = 0i64;
    let mut next = 0;
    let mut logits = vec![0.0; l];
    for &t in &click_times {
        while next < browse_events.len() && browse_events[next].0 <= t {
            let (te, c) = browse_events[next];
            let decay = cfg.alpha.powf((te - now) as f64);
            recent.iter_mut().for_each(|v| *v *= decay);
            recent[c] += 1.0;
            now = te;
            next += 1;
        }
        let decay = cfg.alpha.powf((t - now) as f64);
        recent.iter_mut().for_each(|v| *v *= decay);
        now = t;
        let total: f64 = recent.iter().sum();
        for c in 0..l {
            let share = if total > 0.0 { recent[c] / total } else { 0.0 };
            logits[c] = world.click[prototype][c] + RECENT_WEIGHT * l as f64 * share;
        }
        events.push(EventTuple {
            user,
            timestamp: t,
            group: EventGroup::Adc,
            category: softmax_sampler(&logits, cfg.noise).sample(&mut rng),
        });
    }
    events.sort_unstable();

    let demographic = rng.random_bool(DEMOGRAPHIC_RATE).then(|| {
        let age = if rng.random_bool(DEMOGRAPHIC_SIGNAL) {
            (2 * prototype + rng.random_range(0..2)) % AGE_BUCKETS
        } else {
            rng.random_range(0..AGE_BUCKETS)
        };
        let female = if prototype % 2 == 0 { 0.6 } else { 0.4 };
        Demographic {
            age,
            gender: rng.random_bool(female) as usize,
        }
    });
    (events, demographic)
}

/// Generates the event log and demographics of `cfg.n_users` users with ids
/// `1..=n_users`. Output depends only on `cfg`.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<(EventLog, Demographics)> {
    cfg.validate()?;
    let world = World::new(cfg);
    let users: Vec<_> = (0..cfg.n_users)
        .into_par_iter()
        .map(|i| generate_user(cfg, &world, i))
        .collect();
    let mut events = Vec::with_capacity(users.iter().map(|u| u.0.len()).sum());
    let mut demographics = BTreeMap::new();
    for (i, (evs, demo)) in users.into_iter().enumerate() {
        events.extend(evs);
        if let Some(d) = demo {
            demographics.insert(i as u64 + 1, d);
        }
    }
    Ok((
        EventLog::new(cfg.num_labels, events)?,
        Demographics(demographics),
    ))
}
