use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AgacConfig, AgacError};
use crate::nn::{io, AdamState, NnError, ParamSet, Role};

/// Derives an independent 64-bit seed for stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.gen()
}

/// Actor, critic and adversary with their optimizer states.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub actor: ParamSet,
    pub critic: ParamSet,
    pub adversary: ParamSet,
    pub opt_actor: AdamState,
    pub opt_critic: AdamState,
    pub opt_adversary: AdamState,
}

impl Agent {
    /// Each network is initialized from its own stream of `seed`, so the
    /// actor and critic do not depend on whether an adversary exists.
    pub fn new(config: &AgacConfig, obs_dim: usize, num_actions: usize, seed: u64) -> Result<Self, AgacError> {
        let widths = |out: usize| {
            let mut w = vec![obs_dim];
            w.extend(&config.hidden);
            w.push(out);
            w
        };
        let build = |role: Role, out: usize, stream: u64, gain: f64| -> Result<ParamSet, AgacError> {
            let mut p = ParamSet::mlp(role, &widths(out))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            p.init_uniform(&mut rng, gain);
            Ok(p)
        };
        let actor = build(Role::Actor, num_actions, 1, 0.01)?;
        let critic = build(Role::Critic, 1, 2, 1.0)?;
        let adversary = build(Role::Adversary, num_actions, 3, 0.01)?;
        Ok(Self {
            opt_actor: AdamState::for_params(&actor, config.lr),
            opt_critic: AdamState::for_params(&critic, config.lr),
            opt_adversary: AdamState::for_params(&adversary, config.lr_adversary()),
            actor,
            critic,
            adversary,
        })
    }

    /// Writes `actor.bin`, `critic.bin` and `adversary.bin` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), AgacError> {
        std::fs::create_dir_all(dir).map_err(NnError::from)?;
        for p in [&self.actor, &self.critic, &self.adversary] {
            let file = File::create(dir.join(format!("{}.bin", p.role().name()))).map_err(NnError::from)?;
            let mut w = BufWriter::new(file);
            io::write_params(p, &mut w)?;
            w.flush().map_err(NnError::from)?;
        }
        Ok(())
    }

    pub fn load_actor(dir: &Path) -> Result<ParamSet, AgacError> {
        let file = File::open(dir.join("actor.bin")).map_err(NnError::from)?;
        Ok(io::read_params(BufReader::new(file))?)
    }
}
