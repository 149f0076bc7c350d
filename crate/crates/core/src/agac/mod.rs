//! Adversarially guided actor-critic on top of a clipped-surrogate
//! policy-gradient learner.
//!
//! Three disjoint networks are trained with separate Adam steps: the actor
//! on the clipped surrogate over the bonus-augmented advantage, the critic
//! on the KL-augmented return, and the adversary on KL imitation of the
//! actor. Update rules are selected by name through [`AlgorithmRegistry`].

mod agent;
mod algorithm;
mod config;
mod losses;
mod train;

pub use agent::{derive_seed, Agent};
pub use algorithm::{Agac, Algorithm, AlgorithmRegistry, Ppo, UpdateMetrics};
pub use config::{anneal_c, AgacConfig, Anneal};
pub use losses::{adversary_loss, ppo_policy_loss, value_loss, AdversaryLoss, PolicyLoss, ValueLoss};
pub use train::Trainer;

use thiserror::Error;

use crate::nn::NnError;
use crate::rollout::RolloutError;

/// Consecutive skipped minibatches that abort a run.
pub const MAX_CONSECUTIVE_SKIPS: usize = 3;

#[derive(Debug, Error)]
pub enum AgacError {
    #[error("invalid {field}: {message}")]
    Config { field: &'static str, message: String },
    #[error("non-finite {what}: {detail}")]
    NonFinite { what: &'static str, detail: String },
    #[error("update {update} aborted after {skips} consecutive non-finite minibatches")]
    Diverged { update: u64, skips: usize },
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Rollout(#[from] RolloutError),
}
