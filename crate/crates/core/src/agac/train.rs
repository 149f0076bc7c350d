use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{derive_seed, AgacConfig, AgacError, Agent, Algorithm, UpdateMetrics};
use crate::env::{Scenario, NUM_ACTIONS, OBS_INPUT_DIM};
use crate::rollout::{EpisodeRecord, Policies, Trajectory, VecEnv};

/// Alternates collection and updates until the frame budget is spent.
///
/// Seed streams: 0 drives action sampling and minibatch shuffles, 1–3
/// initialize the networks, 4 draws episode layouts.
pub struct Trainer {
    pub agent: Agent,
    envs: VecEnv,
    algorithm: Arc<dyn Algorithm>,
    config: AgacConfig,
    rng: ChaCha8Rng,
    frames: u64,
    updates: u64,
    last: Option<Trajectory>,
}

impl Trainer {
    pub fn new(
        config: AgacConfig,
        scenario: Scenario,
        algorithm: Arc<dyn Algorithm>,
        seed: u64,
    ) -> Result<Self, AgacError> {
        config.validate()?;
        let agent = Agent::new(&config, OBS_INPUT_DIM, NUM_ACTIONS, seed)?;
        let counting = config.episodic_counting && algorithm.uses_adversary();
        let envs = VecEnv::new(scenario, config.num_envs, derive_seed(seed, 4), counting)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        Ok(Self {
            agent,
            envs,
            algorithm,
            config,
            rng,
            frames: 0,
            updates: 0,
            last: None,
        })
    }

    pub fn config(&self) -> &AgacConfig {
        &self.config
    }

    pub fn algorithm(&self) -> &dyn Algorithm {
        self.algorithm.as_ref()
    }

    pub fn frames(&self) -> u64 {
        self.frames
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn finished(&self) -> bool {
        self.frames >= self.config.total_frames
    }

    /// The batch consumed by the most recent update.
    pub fn last_batch(&self) -> Option<&Trajectory> {
        self.last.as_ref()
    }

    /// Collects one horizon without updating.
    pub fn collect(&mut self) -> Result<(Trajectory, Vec<EpisodeRecord>), AgacError> {
        let nets = Policies {
            actor: &self.agent.actor,
            critic: &self.agent.critic,
            adversary: self.algorithm.uses_adversary().then_some(&self.agent.adversary),
        };
        Ok(self.envs.collect(nets, self.config.steps_per_env, &mut self.rng)?)
    }

    /// One collection followed by one update.
    pub fn step(&mut self) -> Result<(UpdateMetrics, Vec<EpisodeRecord>), AgacError> {
        let (traj, episodes) = self.collect()?;
        self.frames += traj.len() as u64;
        self.updates += 1;
        let metrics = self.algorithm.update(
            &mut self.agent,
            &traj,
            &self.config,
            self.frames,
            self.updates,
            &mut self.rng,
        )?;
        self.last = Some(traj);
        Ok((metrics, episodes))
    }
}
