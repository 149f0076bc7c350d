//! Procedurally generated gridworlds in the style of MiniGrid.
//!
//! Layout families (`MultiRoom`, `KeyCorridor`) implement [`LayoutGenerator`]
//! and are looked up by name in a [`ScenarioRegistry`], so a descriptor
//! string such as `"MultiRoom-N4-S5-rf"` selects the generator at runtime.

mod grid;
mod keycorridor;
mod multiroom;
mod observe;
mod registry;
mod render;
mod solver;

pub use grid::{Action, Cell, Color, DoorState, GridState, Heading, Pos, Room, StepOutcome};
pub use keycorridor::KeyCorridor;
pub use multiroom::MultiRoom;
pub use observe::{observe, Observation, StackedObservation, CELL_CHANNELS, FRAME_STACK, OBS_INPUT_DIM, VIEW_SIZE};
pub use registry::{LayoutGenerator, Scenario, ScenarioRegistry};
pub use render::render_ascii;
pub use solver::{reachable_cells, solve};

use thiserror::Error;

pub const NUM_ACTIONS: usize = 7;

/// Maximum layout attempts before generation gives up.
pub const MAX_GENERATION_ATTEMPTS: u32 = 100;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("unknown scenario family {0:?}")]
    UnknownFamily(String),
    #[error("bad scenario descriptor {descriptor:?}: {reason}")]
    BadDescriptor { descriptor: String, reason: String },
    #[error("action index {0} out of range (7 actions)")]
    BadAction(usize),
    #[error("episode already finished")]
    EpisodeOver,
    #[error("layout generation for {scenario} failed after {attempts} attempts (seed {seed})")]
    GenerationFailed { scenario: String, seed: u64, attempts: u32 },
    #[error("generated layout for {scenario} (seed {seed}) is not solvable")]
    Unsolvable { scenario: String, seed: u64 },
}

/// Builds a fresh episode. Layout depends only on `(scenario, seed)`.
pub fn generate(scenario: &Scenario, seed: u64) -> Result<GridState, EnvError> {
    scenario.generate(seed)
}

pub fn set_reward_free(scenario: &Scenario, flag: bool) -> Scenario {
    scenario.with_reward_free(flag)
}
