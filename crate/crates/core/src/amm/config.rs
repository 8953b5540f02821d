use crate::error::{Error, Result};

/// Importance `ν(i)` of rank position `i` in the rank loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NuMode {
    /// `ν(i) = 1`.
    #[default]
    Constant,
    /// `ν(i) = 1 / i`, penalizing mistakes at the top more.
    InverseRank,
}

impl NuMode {
    pub fn name(self) -> &'static str {
        match self {
            NuMode::Constant => "constant",
            NuMode::InverseRank => "inverse-rank",
        }
    }
}

/// How often weights below the pruning threshold are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrunePeriod {
    Off,
    /// Every `10 * d` SGD steps.
    #[default]
    Auto,
    Every(usize),
}

impl PrunePeriod {
    pub fn steps(self, dim: usize) -> Option<usize> {
        match self {
            PrunePeriod::Off => None,
            PrunePeriod::Auto => Some((10 * dim).max(1)),
            PrunePeriod::Every(n) => Some(n),
        }
    }
}

/// Hyperparameters shared by the SGD trainers.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub max_weights_per_class: usize,
    pub prune_period: PrunePeriod,
    pub prune_threshold: f64,
    pub nu_mode: NuMode,
    pub l2_normalize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 1e-5,
            epochs: 5,
            seed: 0,
            max_weights_per_class: 20,
            prune_period: PrunePeriod::Auto,
            prune_threshold: 1e-8,
            nu_mode: NuMode::Constant,
            l2_normalize: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.max_weights_per_class == 0 {
            return Err(Error::InvalidConfig(
                "max_weights_per_class must be at least 1".into(),
            ));
        }
        if self.prune_period == PrunePeriod::Every(0) {
            return Err(Error::InvalidConfig("prune period must be positive".into()));
        }
        if self.prune_threshold.is_nan() || self.prune_threshold < 0.0 {
            return Err(Error::InvalidConfig(
                "prune threshold must be non-negative".into(),
            ));
        }
        Ok(())
    }
}
