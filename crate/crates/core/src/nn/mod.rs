//! Dense networks with reverse-mode gradients, Adam, and categorical
//! distribution math.

mod adam;
mod dist;
pub mod io;
mod mlp;
mod params;

pub use adam::{adam_step, clip_grad_norm, AdamState};
pub use dist::{dist_entropy, dist_kl, dist_logprob, CategoricalDist, LOGIT_CLAMP};
pub use mlp::{backward, backward_accumulate, forward, forward_into, Input, Tape};
pub use params::{LayerShape, ParamSet, Role};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("action {action} out of range for {actions} actions")]
    ActionOutOfRange { action: usize, actions: usize },
    #[error("non-finite {what}: {count} bad entries, first at {index} = {value}")]
    NonFinite {
        what: String,
        index: usize,
        count: usize,
        value: f64,
    },
    #[error("malformed parameter file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
