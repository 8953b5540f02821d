//! Label ranking with adaptive multi-hyperplane models.
//!
//! The crate provides:
//!
//! * [`amm`]: the multi-hyperplane model with a multiclass trainer and the
//!   AMM-rank trainer for (partial) label rankings,
//! * [`baselines`]: central-ranking, demographic, nearest-neighbour,
//!   one-vs-rest logistic and pairwise logistic rankers,
//! * [`metrics`]: disagreement error and precision/recall/F1 at K,
//! * [`pipeline`]: intensity/recency featurization of ad-event logs, label
//!   construction, and a synthetic event-log generator,
//! * [`experiment`]: algorithm dispatch and cross-validation.

pub mod amm;
pub mod baselines;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod pipeline;
pub mod ranking;
pub mod sparse;
mod textio;

pub use amm::{AmmModel, NuMode, PrunePeriod, TrainConfig, WeightSlot};
pub use dataset::{RankedDataset, RankedInstance};
pub use error::{Error, Result};
pub use metrics::{disagreement_error, topk_metrics, EvalReport};
pub use ranking::{ranking_from_scores, Ranking};
pub use sparse::SparseVector;
