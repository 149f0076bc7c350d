/// Fixed-horizon batch gathered from `num_envs` environments for `steps`
/// steps each. Per-step arrays are env-major: entry `env * steps + t`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub num_envs: usize,
    pub steps: usize,
    pub num_actions: usize,
    pub obs_dim: usize,
    /// Active one-hot indices of the stacked observation.
    pub obs: Vec<Vec<u32>>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
    /// log π(a_t | s_t, θ_old)
    pub logp_old: Vec<f64>,
    /// log π_adv(a_t | s_t, ψ_old)
    pub logp_adv_old: Vec<f64>,
    pub values_old: Vec<f64>,
    /// KL(π(·|s_t, θ_old) ‖ π_adv(·|s_t, ψ_old))
    pub kl_old: Vec<f64>,
    pub count_scale: Vec<f64>,
    /// Full old actor log-distribution, `num_actions` entries per step.
    pub actor_logp_old: Vec<f64>,
    /// V_φold of the state after the last step, per env (0 when that step ended an episode).
    pub bootstrap: Vec<f64>,
}

impl Trajectory {
    pub fn with_capacity(num_envs: usize, steps: usize, num_actions: usize, obs_dim: usize) -> Self {
        let n = num_envs * steps;
        let filled = |v: f64| vec![v; n];
        Self {
            num_envs,
            steps,
            num_actions,
            obs_dim,
            obs: vec![Vec::new(); n],
            actions: vec![0; n],
            rewards: filled(0.0),
            dones: vec![false; n],
            logp_old: filled(0.0),
            logp_adv_old: filled(0.0),
            values_old: filled(0.0),
            kl_old: filled(0.0),
            count_scale: filled(1.0),
            actor_logp_old: vec![0.0; n * num_actions],
            bootstrap: vec![0.0; num_envs],
        }
    }

    pub fn len(&self) -> usize {
        self.num_envs * self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, env: usize, t: usize) -> usize {
        env * self.steps + t
    }

    pub fn actor_logp_row(&self, i: usize) -> &[f64] {
        &self.actor_logp_old[i * self.num_actions..(i + 1) * self.num_actions]
    }

    /// Checks the structural invariants; returns a description of the first violation.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.len();
        let lens = [
            ("obs", self.obs.len()),
            ("actions", self.actions.len()),
            ("rewards", self.rewards.len()),
            ("dones", self.dones.len()),
            ("logp_old", self.logp_old.len()),
            ("logp_adv_old", self.logp_adv_old.len()),
            ("values_old", self.values_old.len()),
            ("kl_old", self.kl_old.len()),
            ("count_scale", self.count_scale.len()),
        ];
        for (name, len) in lens {
            if len != n {
                return Err(format!("{name} has length {len}, expected {n}"));
            }
        }
        if self.actor_logp_old.len() != n * self.num_actions || self.bootstrap.len() != self.num_envs {
            return Err("per-action or bootstrap array has the wrong length".into());
        }
        for i in 0..n {
            if !(self.logp_old[i] <= 0.0) || !(self.logp_adv_old[i] <= 0.0) {
                return Err(format!("log-probability above zero at step {i}"));
            }
            if !(self.kl_old[i] >= 0.0) {
                return Err(format!("negative KL at step {i}"));
            }
            if !(self.count_scale[i] > 0.0 && self.count_scale[i] <= 1.0) {
                return Err(format!(
                    "count scale {} outside (0, 1] at step {i}",
                    self.count_scale[i]
                ));
            }
        }
        Ok(())
    }
}
