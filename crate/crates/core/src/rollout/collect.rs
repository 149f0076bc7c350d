use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EpisodicCounter, RolloutError, Trajectory};
use crate::env::{observe, GridState, Observation, Pos, Room, Scenario, StackedObservation, OBS_INPUT_DIM};
use crate::nn::{forward_into, CategoricalDist, Input, ParamSet, Tape};

/// Network snapshots used while collecting. Without an adversary the
/// adversary log-probabilities mirror the actor's, so the bonus is zero.
#[derive(Debug, Clone, Copy)]
pub struct Policies<'a> {
    pub actor: &'a ParamSet,
    pub critic: &'a ParamSet,
    pub adversary: Option<&'a ParamSet>,
}

/// Summary of one finished episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub env: usize,
    pub seed: u64,
    pub ret: f64,
    pub length: u32,
    pub reached_goal: bool,
    /// Agent position before every action.
    pub positions: Vec<Pos>,
    /// Hashes of the distinct raw observations seen.
    pub distinct_obs: Vec<u64>,
    pub grid_height: i32,
    pub grid_width: i32,
    pub rooms: Vec<Room>,
}

pub fn obs_hash(obs: &Observation) -> u64 {
    let mut h = DefaultHasher::new();
    obs.bytes().hash(&mut h);
    h.finish()
}

struct Slot {
    state: GridState,
    stack: StackedObservation,
    counter: EpisodicCounter,
    ret: f64,
    positions: Vec<Pos>,
    seen: HashSet<u64>,
}

impl Slot {
    fn start(state: GridState) -> Self {
        let mut stack = StackedObservation::new();
        let first = observe(&state);
        stack.reset(first);
        let mut seen = HashSet::new();
        seen.insert(obs_hash(&first));
        Self {
            state,
            stack,
            counter: EpisodicCounter::new(),
            ret: 0.0,
            positions: Vec::new(),
            seen,
        }
    }
}

/// A set of independent environments stepped in lockstep; episodes reset
/// automatically with fresh seeds drawn from an internal stream.
pub struct VecEnv {
    scenario: Scenario,
    slots: Vec<Slot>,
    seed_rng: ChaCha8Rng,
    counting: bool,
}

impl VecEnv {
    pub fn new(scenario: Scenario, num_envs: usize, seed: u64, counting: bool) -> Result<Self, RolloutError> {
        if num_envs == 0 {
            return Err(RolloutError::Config("need at least one environment".into()));
        }
        let mut seed_rng = ChaCha8Rng::seed_from_u64(seed);
        let mut slots = Vec::with_capacity(num_envs);
        for _ in 0..num_envs {
            let s = seed_rng.gen();
            slots.push(Slot::start(scenario.generate(s)?));
        }
        Ok(Self {
            scenario,
            slots,
            seed_rng,
            counting,
        })
    }

    pub fn num_envs(&self) -> usize {
        self.slots.len()
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn states(&self) -> impl Iterator<Item = &GridState> {
        self.slots.iter().map(|s| &s.state)
    }

    /// Runs `steps` steps in every environment under fixed snapshots.
    pub fn collect<R: Rng>(
        &mut self,
        nets: Policies<'_>,
        steps: usize,
        rng: &mut R,
    ) -> Result<(Trajectory, Vec<EpisodeRecord>), RolloutError> {
        let n_actions = nets.actor.output_dim();
        if nets.critic.output_dim() != 1 {
            return Err(RolloutError::Config("critic must have a single output".into()));
        }
        if let Some(adv) = nets.adversary {
            if adv.output_dim() != n_actions {
                return Err(RolloutError::Config("adversary and actor action counts differ".into()));
            }
        }
        let mut traj = Trajectory::with_capacity(self.slots.len(), steps, n_actions, OBS_INPUT_DIM);
        let mut episodes = Vec::new();
        let mut tape = Tape::default();
        let mut idx = Vec::new();
        for t in 0..steps {
            for (env, slot) in self.slots.iter_mut().enumerate() {
                let i = env * steps + t;
                slot.stack.active_indices(&mut idx);
                let input = Input::OneHot {
                    dim: OBS_INPUT_DIM,
                    active: &idx,
                };
                forward_into(nets.actor, input, &mut tape)?;
                let logits = tape.output().to_vec();
                check_finite("actor logits", &logits, env, t)?;
                let pi = CategoricalDist::from_logits(&logits);
                forward_into(nets.critic, input, &mut tape)?;
                let value = tape.output()[0];
                check_finite("critic value", &[value], env, t)?;
                let action = pi.sample(rng);
                let logp = pi.log_prob(action)?;
                let (logp_adv, kl) = match nets.adversary {
                    Some(adv) => {
                        forward_into(adv, input, &mut tape)?;
                        check_finite("adversary logits", tape.output(), env, t)?;
                        let q = CategoricalDist::from_logits(tape.output());
                        (q.log_prob(action)?, pi.kl(&q))
                    }
                    None => (logp, 0.0),
                };
                let latest = *slot.stack.latest().expect("stack holds the current frame");
                let scale = if self.counting {
                    slot.counter.visit(&latest)
                } else {
                    1.0
                };

                slot.positions.push(slot.state.agent());
                let out = slot.state.step_in_place(action)?;
                slot.ret += out.reward;

                traj.obs[i] = std::mem::take(&mut idx);
                traj.actions[i] = action;
                traj.rewards[i] = out.reward;
                traj.dones[i] = out.done;
                traj.logp_old[i] = logp;
                traj.logp_adv_old[i] = logp_adv;
                traj.values_old[i] = value;
                traj.kl_old[i] = kl;
                traj.count_scale[i] = scale;
                traj.actor_logp_old[i * n_actions..(i + 1) * n_actions].copy_from_slice(pi.log_probs());

                if out.done {
                    let finished = std::mem::replace(slot, Slot::start(self.scenario.generate(self.seed_rng.gen())?));
                    let mut distinct: Vec<u64> = finished.seen.into_iter().collect();
                    distinct.sort_unstable();
                    episodes.push(EpisodeRecord {
                        env,
                        seed: finished.state.seed(),
                        ret: finished.ret,
                        length: finished.state.steps(),
                        reached_goal: out.reached_goal,
                        positions: finished.positions,
                        distinct_obs: distinct,
                        grid_height: finished.state.height(),
                        grid_width: finished.state.width(),
                        rooms: finished.state.rooms().to_vec(),
                    });
                } else {
                    let obs = observe(&slot.state);
                    slot.seen.insert(obs_hash(&obs));
                    slot.stack.push(obs);
                }
            }
        }
        for (env, slot) in self.slots.iter_mut().enumerate() {
            let last = traj.index(env, steps - 1);
            traj.bootstrap[env] = if steps == 0 || traj.dones[last] {
                0.0
            } else {
                slot.stack.active_indices(&mut idx);
                forward_into(
                    nets.critic,
                    Input::OneHot {
                        dim: OBS_INPUT_DIM,
                        active: &idx,
                    },
                    &mut tape,
                )?;
                tape.output()[0]
            };
        }
        Ok((traj, episodes))
    }
}

fn check_finite(what: &'static str, xs: &[f64], env: usize, t: usize) -> Result<(), RolloutError> {
    match xs.iter().position(|x| !x.is_finite()) {
        None => Ok(()),
        Some(k) => Err(RolloutError::NonFinite {
            what,
            env,
            step: t,
            detail: format!("entry {k} = {}", xs[k]),
        }),
    }
}
