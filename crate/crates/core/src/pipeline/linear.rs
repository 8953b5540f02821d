use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::{RankedDataset, RankedInstance};
use crate::ranking::ranking_from_scores;
use crate::sparse::SparseVector;

/// Instances whose full ranking is the argsort of `W* x` for a random
/// Gaussian `W*` (`num_labels × dim`).
///
/// The first feature is the constant 1 and the rest are standard normal, so
/// the hidden scores have a per-label offset.
pub fn linear_ranking_dataset(n: usize, num_labels: usize, dim: usize, seed: u64) -> RankedDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden: Vec<Vec<f64>> = (0..num_labels)
        .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let instances = (0..n)
        .map(|_| {
            let mut x = vec![1.0; dim];
            for v in x.iter_mut().skip(1) {
                *v = rng.sample(StandardNormal);
            }
            let scores: Vec<f64> = hidden
                .iter()
                .map(|w| w.iter().zip(&x).map(|(a, b)| a * b).sum())
                .collect();
            RankedInstance {
                features: SparseVector::from_dense(&x),
                truth: ranking_from_scores(&scores),
            }
        })
        .collect();
    RankedDataset::new(num_labels, dim, instances).expect("generated data is valid")
}
