//! Fixed-horizon data collection and advantage estimation.

mod advantage;
mod collect;
mod counter;
pub mod dump;
mod trajectory;

pub use advantage::{
    advantage_batch, compute_agac_advantage, compute_gae, compute_returns, compute_value_target, intrinsic_bonus,
    normalize, AdvantageBatch,
};
pub use collect::{obs_hash, EpisodeRecord, Policies, VecEnv};
pub use counter::{episodic_scale, EpisodicCounter};
pub use trajectory::Trajectory;

use thiserror::Error;

use crate::env::EnvError;
use crate::nn::NnError;

#[derive(Debug, Error)]
pub enum RolloutError {
    #[error("rollout configuration: {0}")]
    Config(String),
    #[error("non-finite {what} in env {env} at step {step}: {detail}")]
    NonFinite {
        what: &'static str,
        env: usize,
        step: usize,
        detail: String,
    },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("trajectory dump: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
