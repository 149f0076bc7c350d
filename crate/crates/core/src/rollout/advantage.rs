use super::Trajectory;

/// Advantages and critic targets for one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageBatch {
    /// Plain GAE advantages A_t.
    pub advantages: Vec<f64>,
    /// A_t plus the scaled adversarial bonus.
    pub agac_advantages: Vec<f64>,
    /// V̂_t = A_t + V_old(s_t).
    pub returns: Vec<f64>,
    /// V̂_t plus the scaled KL term.
    pub value_targets: Vec<f64>,
    /// Standardized `agac_advantages` fed to the policy loss.
    pub normalized: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Backward GAE recursion per environment; no bootstrapping across dones.
pub fn compute_gae(traj: &Trajectory, gamma: f64, lambda: f64) -> Vec<f64> {
    let mut adv = vec![0.0; traj.len()];
    for env in 0..traj.num_envs {
        let mut next_value = traj.bootstrap[env];
        let mut gae = 0.0;
        for t in (0..traj.steps).rev() {
            let i = traj.index(env, t);
            let live = if traj.dones[i] { 0.0 } else { 1.0 };
            let delta = traj.rewards[i] + gamma * next_value * live - traj.values_old[i];
            gae = delta + gamma * lambda * live * gae;
            adv[i] = gae;
            next_value = traj.values_old[i];
        }
    }
    adv
}

pub fn compute_returns(traj: &Trajectory, advantages: &[f64]) -> Vec<f64> {
    advantages.iter().zip(&traj.values_old).map(|(a, v)| a + v).collect()
}

/// A_t + c · scale_t · (log π − log π_adv).
pub fn compute_agac_advantage(traj: &Trajectory, advantages: &[f64], c: f64) -> Vec<f64> {
    (0..traj.len())
        .map(|i| advantages[i] + c * traj.count_scale[i] * (traj.logp_old[i] - traj.logp_adv_old[i]))
        .collect()
}

/// V̂_t + c · scale_t · KL_t.
pub fn compute_value_target(traj: &Trajectory, returns: &[f64], c: f64) -> Vec<f64> {
    (0..traj.len())
        .map(|i| returns[i] + c * traj.count_scale[i] * traj.kl_old[i])
        .collect()
}

/// Per-step bonus c · scale_t · (log π − log π_adv).
pub fn intrinsic_bonus(traj: &Trajectory, c: f64) -> Vec<f64> {
    (0..traj.len())
        .map(|i| c * traj.count_scale[i] * (traj.logp_old[i] - traj.logp_adv_old[i]))
        .collect()
}

/// Standardizes to mean 0 and unit standard deviation.
pub fn normalize(xs: &[f64]) -> (Vec<f64>, f64, f64) {
    let n = xs.len().max(1) as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    let out = xs.iter().map(|x| (x - mean) / (std + 1e-8)).collect();
    (out, mean, std)
}

pub fn advantage_batch(traj: &Trajectory, gamma: f64, lambda: f64, c: f64, normalize_adv: bool) -> AdvantageBatch {
    let advantages = compute_gae(traj, gamma, lambda);
    let returns = compute_returns(traj, &advantages);
    let agac_advantages = compute_agac_advantage(traj, &advantages, c);
    let value_targets = compute_value_target(traj, &returns, c);
    let (normalized, mean, std) = if normalize_adv {
        normalize(&agac_advantages)
    } else {
        (agac_advantages.clone(), 0.0, 1.0)
    };
    AdvantageBatch {
        advantages,
        agac_advantages,
        returns,
        value_targets,
        normalized,
        mean,
        std,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_traj(rng: &mut ChaCha8Rng, num_envs: usize, steps: usize, done_p: f64) -> Trajectory {
        let mut t = Trajectory::with_capacity(num_envs, steps, 3, 4);
        for i in 0..t.len() {
            t.rewards[i] = rng.gen_range(-1.0..1.0);
            t.values_old[i] = rng.gen_range(-1.0..1.0);
            t.dones[i] = rng.gen_bool(done_p);
            t.logp_old[i] = -rng.gen_range(0.0..3.0);
            t.logp_adv_old[i] = -rng.gen_range(0.0..3.0);
            t.kl_old[i] = rng.gen_range(0.0..2.0);
            t.count_scale[i] = 1.0 / (rng.gen_range(1..5) as f64).sqrt();
        }
        for e in 0..num_envs {
            let last = t.index(e, steps - 1);
            t.bootstrap[e] = if t.dones[last] { 0.0 } else { rng.gen_range(-1.0..1.0) };
        }
        t
    }

    // O(T^2) definition: sum of discounted TD residuals up to the episode end.
    fn gae_direct(t: &Trajectory, gamma: f64, lambda: f64) -> Vec<f64> {
        let mut out = vec![0.0; t.len()];
        for env in 0..t.num_envs {
            for s in 0..t.steps {
                let mut acc = 0.0;
                let mut weight = 1.0;
                for u in s..t.steps {
                    let i = t.index(env, u);
                    let next_v = if t.dones[i] {
                        0.0
                    } else if u + 1 < t.steps {
                        t.values_old[i + 1]
                    } else {
                        t.bootstrap[env]
                    };
                    acc += weight * (t.rewards[i] + gamma * next_v - t.values_old[i]);
                    if t.dones[i] {
                        break;
                    }
                    weight *= gamma * lambda;
                }
                out[t.index(env, s)] = acc;
            }
        }
        out
    }

    #[test]
    fn lambda_zero_is_one_step_td() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_traj(&mut rng, 2, 6, 0.2);
        let a = compute_gae(&t, 0.9, 0.0);
        for env in 0..2 {
            for s in 0..6 {
                let i = t.index(env, s);
                let next = if t.dones[i] {
                    0.0
                } else if s + 1 < 6 {
                    t.values_old[i + 1]
                } else {
                    t.bootstrap[env]
                };
                assert_eq!(a[i], t.rewards[i] + 0.9 * next - t.values_old[i]);
            }
        }
    }

    #[test]
    fn terminal_step_does_not_bootstrap() {
        let mut t = Trajectory::with_capacity(1, 1, 3, 4);
        t.rewards[0] = 1.0;
        t.values_old[0] = 0.4;
        t.dones[0] = true;
        t.bootstrap[0] = 123.0;
        for gamma in [0.0, 0.5, 0.99] {
            assert!((compute_gae(&t, gamma, 0.95)[0] - 0.6).abs() < 1e-15);
        }
    }

    #[test]
    fn five_steps_match_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = random_traj(&mut rng, 1, 5, 0.0);
        let a = compute_gae(&t, 0.99, 0.95);
        let b = gae_direct(&t, 0.99, 0.95);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn agac_advantage_cases() {
        let mut t = Trajectory::with_capacity(1, 1, 3, 4);
        t.logp_old[0] = -0.1;
        t.logp_adv_old[0] = -2.3;
        let a = compute_agac_advantage(&t, &[1.0], 0.5);
        assert!((a[0] - 2.1).abs() < 1e-12);
        assert_eq!(compute_agac_advantage(&t, &[1.0], 0.0), vec![1.0]);
        t.logp_adv_old[0] = -0.1;
        assert_eq!(compute_agac_advantage(&t, &[1.0], 0.7), vec![1.0]);
    }

    #[test]
    fn value_target_cases() {
        let mut t = Trajectory::with_capacity(1, 1, 3, 4);
        t.kl_old[0] = 1.5;
        assert!((compute_value_target(&t, &[0.5], 0.2)[0] - 0.8).abs() < 1e-12);
        assert_eq!(compute_value_target(&t, &[0.5], 0.0), vec![0.5]);
        t.kl_old[0] = 0.0;
        assert_eq!(compute_value_target(&t, &[0.5], 0.2), vec![0.5]);
    }

    #[test]
    fn lambda_one_exposes_mirrored_terms() {
        // one complete episode per env: A^AGAC = G_t - V_old(s_t) + c (log π - log π_adv)
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let steps = rng.gen_range(1..8);
            let mut t = random_traj(&mut rng, 1, steps, 0.0);
            t.dones[steps - 1] = true;
            let gamma = 0.97;
            let c = 0.3;
            let a = compute_agac_advantage(&t, &compute_gae(&t, gamma, 1.0), c);
            for s in 0..steps {
                let g: f64 = (s..steps).map(|u| gamma.powi((u - s) as i32) * t.rewards[u]).sum();
                let expected = g - t.values_old[s] + c * t.count_scale[s] * (t.logp_old[s] - t.logp_adv_old[s]);
                assert!((a[s] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_bonus_is_plain_ppo_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = random_traj(&mut rng, 3, 9, 0.1);
        let b = advantage_batch(&t, 0.99, 0.95, 0.0, true);
        let a = compute_gae(&t, 0.99, 0.95);
        let (n, _, _) = normalize(&a);
        assert_eq!(b.agac_advantages, a);
        assert_eq!(b.value_targets, compute_returns(&t, &a));
        assert_eq!(b.normalized, n);
    }

    proptest! {
        #[test]
        fn recursion_matches_direct_sum(seed in 0u64..10_000, envs in 1usize..4, steps in 1usize..40, p in 0.0f64..0.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = random_traj(&mut rng, envs, steps, p);
            let a = compute_gae(&t, 0.99, 0.95);
            let b = gae_direct(&t, 0.99, 0.95);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }

        #[test]
        fn bonus_sign_follows_log_ratio(seed in 0u64..10_000, c in 1e-6f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = random_traj(&mut rng, 2, 10, 0.1);
            let a = compute_gae(&t, 0.99, 0.95);
            let g = compute_agac_advantage(&t, &a, c);
            for i in 0..t.len() {
                let diff = t.logp_old[i] - t.logp_adv_old[i];
                prop_assert!((g[i] - a[i]) * diff >= 0.0);
            }
        }
    }
}
