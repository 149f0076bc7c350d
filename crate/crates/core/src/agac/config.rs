use serde::{Deserialize, Serialize};

use super::AgacError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anneal {
    /// c decays linearly from c0 to 0 over `total_frames`.
    Linear,
    Constant,
}

/// Hyperparameters of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgacConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_epsilon: f64,
    /// α
    pub entropy_coef: f64,
    /// β_V
    pub value_coef: f64,
    /// β_adv
    pub adversary_coef: f64,
    /// Initial bonus coefficient c0.
    pub c0: f64,
    pub anneal: Anneal,
    /// η1, shared by actor and critic.
    pub lr: f64,
    /// ν = η2 / η1.
    pub lr_ratio: f64,
    pub epochs: usize,
    pub minibatches: usize,
    pub num_envs: usize,
    pub steps_per_env: usize,
    pub frame_stack: usize,
    pub total_frames: u64,
    pub max_grad_norm: f64,
    pub hidden: Vec<usize>,
    pub episodic_counting: bool,
    pub normalize_advantages: bool,
}

impl Default for AgacConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_epsilon: 0.2,
            entropy_coef: 0.01,
            value_coef: 0.5,
            adversary_coef: 4e-5,
            c0: 4e-4,
            anneal: Anneal::Linear,
            lr: 3e-4,
            lr_ratio: 0.3,
            epochs: 4,
            minibatches: 8,
            num_envs: 16,
            steps_per_env: 128,
            frame_stack: 4,
            total_frames: 3_000_000,
            max_grad_norm: 0.5,
            hidden: vec![128, 128],
            episodic_counting: true,
            normalize_advantages: true,
        }
    }
}

impl AgacConfig {
    /// Rollout horizon T per update.
    pub fn horizon(&self) -> usize {
        self.num_envs * self.steps_per_env
    }

    /// η2 = ν · η1.
    pub fn lr_adversary(&self) -> f64 {
        self.lr * self.lr_ratio
    }

    pub fn minibatch_size(&self) -> usize {
        self.horizon() / self.minibatches
    }

    pub fn validate(&self) -> Result<(), AgacError> {
        let bad = |field: &'static str, msg: String| Err(AgacError::Config { field, message: msg });
        let nonneg = [
            ("entropy_coef", self.entropy_coef),
            ("value_coef", self.value_coef),
            ("adversary_coef", self.adversary_coef),
            ("c0", self.c0),
        ];
        for (field, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return bad(field, format!("must be a finite value >= 0, got {v}"));
            }
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma", format!("must lie in [0, 1), got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae_lambda", format!("must lie in [0, 1], got {}", self.gae_lambda));
        }
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return bad("clip_epsilon", format!("must lie in (0, 1), got {}", self.clip_epsilon));
        }
        for (field, v) in [
            ("lr", self.lr),
            ("lr_ratio", self.lr_ratio),
            ("max_grad_norm", self.max_grad_norm),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(field, format!("must be a finite value > 0, got {v}"));
            }
        }
        for (field, v) in [
            ("epochs", self.epochs),
            ("minibatches", self.minibatches),
            ("num_envs", self.num_envs),
            ("steps_per_env", self.steps_per_env),
        ] {
            if v == 0 {
                return bad(field, "must be at least 1".into());
            }
        }
        if !self.horizon().is_multiple_of(self.minibatches) {
            return bad(
                "minibatches",
                format!(
                    "must divide the horizon {} evenly, got {}",
                    self.horizon(),
                    self.minibatches
                ),
            );
        }
        if self.frame_stack != crate::env::FRAME_STACK {
            return bad(
                "frame_stack",
                format!(
                    "the observation encoder stacks {} frames, got {}",
                    crate::env::FRAME_STACK,
                    self.frame_stack
                ),
            );
        }
        if self.total_frames < self.horizon() as u64 {
            return bad(
                "total_frames",
                format!(
                    "must cover at least one horizon of {} frames, got {}",
                    self.horizon(),
                    self.total_frames
                ),
            );
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden", "needs at least one layer, each of width >= 1".into());
        }
        Ok(())
    }
}

/// c = c0 · max(0, 1 − frames_done / total_frames) under linear annealing.
pub fn anneal_c(config: &AgacConfig, frames_done: u64) -> f64 {
    match config.anneal {
        Anneal::Constant => config.c0,
        Anneal::Linear => {
            let frac = frames_done as f64 / config.total_frames as f64;
            config.c0 * (1.0 - frac).max(0.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = AgacConfig::default();
        c.validate().unwrap();
        assert_eq!(c.horizon(), 2048);
        assert_eq!(c.minibatch_size(), 256);
        assert!((c.lr_adversary() - 9e-5).abs() < 1e-18);
    }

    #[test]
    fn anneal_endpoints() {
        let c = AgacConfig {
            total_frames: 1_000_000,
            ..Default::default()
        };
        assert_eq!(anneal_c(&c, 0), 4e-4);
        assert_eq!(anneal_c(&c, 1_000_000), 0.0);
        assert_eq!(anneal_c(&c, 2_000_000), 0.0);
        assert!((anneal_c(&c, 500_000) - 2e-4).abs() < 1e-18);
        let k = AgacConfig {
            anneal: Anneal::Constant,
            ..c
        };
        assert_eq!(anneal_c(&k, 700_000), 4e-4);
    }

    #[test]
    fn rejects_out_of_range() {
        let cases = [
            AgacConfig {
                clip_epsilon: 1.5,
                ..Default::default()
            },
            AgacConfig {
                gamma: 1.0,
                ..Default::default()
            },
            AgacConfig {
                c0: -1.0,
                ..Default::default()
            },
            AgacConfig {
                minibatches: 3,
                ..Default::default()
            },
            AgacConfig {
                lr: 0.0,
                ..Default::default()
            },
            AgacConfig {
                frame_stack: 2,
                ..Default::default()
            },
        ];
        for c in cases {
            assert!(matches!(c.validate(), Err(AgacError::Config { .. })), "{c:?}");
        }
    }
}
