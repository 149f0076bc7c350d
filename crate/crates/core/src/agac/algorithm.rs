use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    adversary_loss, anneal_c, ppo_policy_loss, value_loss, AgacConfig, AgacError, Agent, MAX_CONSECUTIVE_SKIPS,
};
use crate::nn::{adam_step, clip_grad_norm, Tape};
use crate::rollout::{advantage_batch, compute_gae, compute_returns, intrinsic_bonus, normalize, Trajectory};

/// Per-update training statistics; losses are averaged over the minibatches
/// that were applied.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct UpdateMetrics {
    pub update: u64,
    pub frames: u64,
    pub c: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub adversary_loss: f64,
    pub entropy: f64,
    /// Mean KL(π_old ‖ π_adv,old) over the collected batch.
    pub kl_mean: f64,
    /// Mean of c · scale · (log π_old − log π_adv,old) over the batch.
    pub bonus_mean: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
    pub skipped: usize,
}

/// An update rule applied to one collected trajectory.
pub trait Algorithm: Send + Sync + Debug {
    fn name(&self) -> &'static str;

    /// Whether collection should query the adversary and episodic counts.
    fn uses_adversary(&self) -> bool;

    /// `frames` counts every frame collected so far, including `traj`.
    fn update(
        &self,
        agent: &mut Agent,
        traj: &Trajectory,
        config: &AgacConfig,
        frames: u64,
        update: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<UpdateMetrics, AgacError>;
}

#[derive(Debug, Clone, Default)]
pub struct AlgorithmRegistry {
    entries: BTreeMap<String, Arc<dyn Algorithm>>,
}

impl AlgorithmRegistry {
    pub fn with_builtins() -> Self {
        let mut r = Self::default();
        r.register(Arc::new(Agac));
        r.register(Arc::new(Ppo));
        r
    }

    pub fn register(&mut self, algo: Arc<dyn Algorithm>) {
        self.entries.insert(algo.name().to_string(), algo);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Algorithm>, AgacError> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| AgacError::UnknownAlgorithm(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

fn zero(buf: &mut [f64]) {
    buf.iter_mut().for_each(|x| *x = 0.0);
}

fn all_finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

fn check_skips(skips: &mut usize, applied: bool, update: u64) -> Result<(), AgacError> {
    if applied {
        *skips = 0;
        return Ok(());
    }
    *skips += 1;
    if *skips >= MAX_CONSECUTIVE_SKIPS {
        return Err(AgacError::Diverged { update, skips: *skips });
    }
    Ok(())
}

/// Adversarially guided update: actor on the clipped surrogate over
/// A + c·scale·(log π_old − log π_adv,old), critic towards V̂ + c·scale·KL,
/// adversary on KL(π_old ‖ π_adv).
#[derive(Debug, Clone, Copy, Default)]
pub struct Agac;

impl Algorithm for Agac {
    fn name(&self) -> &'static str {
        "agac"
    }

    fn uses_adversary(&self) -> bool {
        true
    }

    fn update(
        &self,
        agent: &mut Agent,
        traj: &Trajectory,
        cfg: &AgacConfig,
        frames: u64,
        update: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<UpdateMetrics, AgacError> {
        let c = anneal_c(cfg, frames);
        let batch = advantage_batch(traj, cfg.gamma, cfg.gae_lambda, c, cfg.normalize_advantages);
        let n = traj.len();
        let mut m = UpdateMetrics {
            update,
            frames,
            c,
            kl_mean: traj.kl_old.iter().sum::<f64>() / n as f64,
            bonus_mean: intrinsic_bonus(traj, c).iter().sum::<f64>() / n as f64,
            ..Default::default()
        };
        let mut g_actor = vec![0.0; agent.actor.len()];
        let mut g_critic = vec![0.0; agent.critic.len()];
        let mut g_adv = vec![0.0; agent.adversary.len()];
        let mut tape = Tape::default();
        let mut perm: Vec<usize> = (0..n).collect();
        let size = n / cfg.minibatches;
        let (mut applied, mut skips) = (0usize, 0usize);
        for _ in 0..cfg.epochs {
            perm.shuffle(rng);
            for idx in perm.chunks(size) {
                zero(&mut g_actor);
                zero(&mut g_critic);
                zero(&mut g_adv);
                let losses = ppo_policy_loss(
                    &agent.actor,
                    traj,
                    idx,
                    &batch.normalized,
                    cfg.clip_epsilon,
                    cfg.entropy_coef,
                    &mut tape,
                    &mut g_actor,
                )
                .and_then(|pl| {
                    let vl = value_loss(&agent.critic, traj, idx, &batch.value_targets, &mut tape, &mut g_critic)?;
                    let al = adversary_loss(&agent.adversary, traj, idx, &mut tape, &mut g_adv)?;
                    Ok((pl, vl, al))
                });
                let ok = match &losses {
                    Ok((pl, vl, al)) => {
                        pl.loss.is_finite()
                            && vl.loss.is_finite()
                            && al.loss.is_finite()
                            && all_finite(&g_actor)
                            && all_finite(&g_critic)
                            && all_finite(&g_adv)
                    }
                    Err(AgacError::NonFinite { .. }) => false,
                    Err(_) => return losses.map(|_| m),
                };
                check_skips(&mut skips, ok, update)?;
                if !ok {
                    m.skipped += 1;
                    continue;
                }
                let (pl, vl, al) = losses?;
                g_critic.iter_mut().for_each(|g| *g *= cfg.value_coef);
                g_adv.iter_mut().for_each(|g| *g *= cfg.adversary_coef);
                clip_grad_norm(&mut g_actor, cfg.max_grad_norm);
                clip_grad_norm(&mut g_critic, cfg.max_grad_norm);
                clip_grad_norm(&mut g_adv, cfg.max_grad_norm);
                adam_step(&mut agent.actor, &g_actor, &mut agent.opt_actor)?;
                adam_step(&mut agent.critic, &g_critic, &mut agent.opt_critic)?;
                adam_step(&mut agent.adversary, &g_adv, &mut agent.opt_adversary)?;
                applied += 1;
                m.policy_loss += pl.loss;
                m.value_loss += vl.loss;
                m.adversary_loss += al.loss;
                m.entropy += pl.entropy;
                m.clip_fraction += pl.clip_fraction;
                m.approx_kl += pl.approx_kl;
            }
        }
        average(&mut m, applied);
        Ok(m)
    }
}

/// Reference clipped-surrogate update with no adversary and no bonus.
#[derive(Debug, Clone, Copy, Default)]
pub struct Ppo;

impl Algorithm for Ppo {
    fn name(&self) -> &'static str {
        "ppo"
    }

    fn uses_adversary(&self) -> bool {
        false
    }

    fn update(
        &self,
        agent: &mut Agent,
        traj: &Trajectory,
        cfg: &AgacConfig,
        frames: u64,
        update: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<UpdateMetrics, AgacError> {
        let advantages = compute_gae(traj, cfg.gamma, cfg.gae_lambda);
        let returns = compute_returns(traj, &advantages);
        let adv = if cfg.normalize_advantages {
            normalize(&advantages).0
        } else {
            advantages
        };
        let n = traj.len();
        let mut m = UpdateMetrics {
            update,
            frames,
            ..Default::default()
        };
        let mut g_actor = vec![0.0; agent.actor.len()];
        let mut g_critic = vec![0.0; agent.critic.len()];
        let mut tape = Tape::default();
        let mut perm: Vec<usize> = (0..n).collect();
        let (mut applied, mut skips) = (0usize, 0usize);
        for _ in 0..cfg.epochs {
            perm.shuffle(rng);
            for idx in perm.chunks(n / cfg.minibatches) {
                zero(&mut g_actor);
                zero(&mut g_critic);
                let pl = match ppo_policy_loss(
                    &agent.actor,
                    traj,
                    idx,
                    &adv,
                    cfg.clip_epsilon,
                    cfg.entropy_coef,
                    &mut tape,
                    &mut g_actor,
                ) {
                    Ok(pl) => Some(pl),
                    Err(AgacError::NonFinite { .. }) => None,
                    Err(e) => return Err(e),
                };
                let vl = value_loss(&agent.critic, traj, idx, &returns, &mut tape, &mut g_critic)?;
                let ok = pl.is_some_and(|p| p.loss.is_finite())
                    && vl.loss.is_finite()
                    && all_finite(&g_actor)
                    && all_finite(&g_critic);
                check_skips(&mut skips, ok, update)?;
                let Some(pl) = pl.filter(|_| ok) else {
                    m.skipped += 1;
                    continue;
                };
                g_critic.iter_mut().for_each(|g| *g *= cfg.value_coef);
                clip_grad_norm(&mut g_actor, cfg.max_grad_norm);
                clip_grad_norm(&mut g_critic, cfg.max_grad_norm);
                adam_step(&mut agent.actor, &g_actor, &mut agent.opt_actor)?;
                adam_step(&mut agent.critic, &g_critic, &mut agent.opt_critic)?;
                applied += 1;
                m.policy_loss += pl.loss;
                m.value_loss += vl.loss;
                m.entropy += pl.entropy;
                m.clip_fraction += pl.clip_fraction;
                m.approx_kl += pl.approx_kl;
            }
        }
        average(&mut m, applied);
        Ok(m)
    }
}

fn average(m: &mut UpdateMetrics, applied: usize) {
    if applied == 0 {
        return;
    }
    let k = applied as f64;
    m.policy_loss /= k;
    m.value_loss /= k;
    m.adversary_loss /= k;
    m.entropy /= k;
    m.clip_fraction /= k;
    m.approx_kl /= k;
}
