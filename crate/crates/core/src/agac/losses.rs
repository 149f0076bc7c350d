use super::AgacError;
use crate::nn::{backward_accumulate, forward_into, CategoricalDist, Input, ParamSet, Tape};
use crate::rollout::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolicyLoss {
    /// Clipped surrogate minus α · entropy, averaged over the minibatch.
    pub loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    /// Mean of log π_old − log π over the minibatch.
    pub approx_kl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ValueLoss {
    pub loss: f64,
    pub mean_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdversaryLoss {
    /// Mean KL(π_old ‖ π_adv).
    pub loss: f64,
}

fn input<'a>(traj: &Trajectory, active: &'a [u32]) -> Input<'a> {
    Input::OneHot {
        dim: traj.obs_dim,
        active,
    }
}

/// Clipped-surrogate loss over `idx`; d(loss)/dθ is added to `grad`.
/// `adv` is indexed like the trajectory.
#[allow(clippy::too_many_arguments)]
pub fn ppo_policy_loss(
    actor: &ParamSet,
    traj: &Trajectory,
    idx: &[usize],
    adv: &[f64],
    clip_epsilon: f64,
    entropy_coef: f64,
    tape: &mut Tape,
    grad: &mut [f64],
) -> Result<PolicyLoss, AgacError> {
    let n = idx.len() as f64;
    let mut out = PolicyLoss::default();
    let mut upstream = vec![0.0; actor.output_dim()];
    for &i in idx {
        forward_into(actor, input(traj, &traj.obs[i]), tape)?;
        let dist = CategoricalDist::from_logits(tape.output());
        let a = traj.actions[i];
        let logp = dist.log_prob(a)?;
        let ratio = (logp - traj.logp_old[i]).exp();
        if !ratio.is_finite() {
            return Err(AgacError::NonFinite {
                what: "policy ratio",
                detail: format!("sample {i}: log π = {logp}, log π_old = {}", traj.logp_old[i]),
            });
        }
        let a_hat = adv[i];
        let surr1 = ratio * a_hat;
        let surr2 = ratio.clamp(1.0 - clip_epsilon, 1.0 + clip_epsilon) * a_hat;
        let entropy = dist.entropy();
        out.loss += -surr1.min(surr2) - entropy_coef * entropy;
        out.entropy += entropy;
        out.approx_kl += traj.logp_old[i] - logp;
        if (ratio - 1.0).abs() > clip_epsilon {
            out.clip_fraction += 1.0;
        }
        // the clipped branch is constant in θ
        let d_logp = if surr1 <= surr2 { -a_hat * ratio } else { 0.0 };
        for (j, (u, &lp)) in upstream.iter_mut().zip(dist.log_probs()).enumerate() {
            if dist.clamped(j) {
                *u = 0.0;
                continue;
            }
            let p = lp.exp();
            let onehot = if j == a { 1.0 } else { 0.0 };
            *u = (d_logp * (onehot - p) + entropy_coef * p * (lp + entropy)) / n;
        }
        backward_accumulate(actor, tape, &upstream, grad)?;
    }
    out.loss /= n;
    out.entropy /= n;
    out.approx_kl /= n;
    out.clip_fraction /= n;
    Ok(out)
}

/// Mean squared error against constant targets; d(loss)/dφ is added to `grad`.
pub fn value_loss(
    critic: &ParamSet,
    traj: &Trajectory,
    idx: &[usize],
    targets: &[f64],
    tape: &mut Tape,
    grad: &mut [f64],
) -> Result<ValueLoss, AgacError> {
    let n = idx.len() as f64;
    let mut out = ValueLoss::default();
    for &i in idx {
        forward_into(critic, input(traj, &traj.obs[i]), tape)?;
        let v = tape.output()[0];
        let err = v - targets[i];
        out.loss += err * err;
        out.mean_value += v;
        backward_accumulate(critic, tape, &[2.0 * err / n], grad)?;
    }
    out.loss /= n;
    out.mean_value /= n;
    Ok(out)
}

/// Mean KL(π_old ‖ π_adv) with the actor's stored distribution as constant;
/// d(loss)/dψ is added to `grad`.
pub fn adversary_loss(
    adversary: &ParamSet,
    traj: &Trajectory,
    idx: &[usize],
    tape: &mut Tape,
    grad: &mut [f64],
) -> Result<AdversaryLoss, AgacError> {
    let n = idx.len() as f64;
    let mut loss = 0.0;
    let mut upstream = vec![0.0; adversary.output_dim()];
    for &i in idx {
        forward_into(adversary, input(traj, &traj.obs[i]), tape)?;
        let q = CategoricalDist::from_logits(tape.output());
        let lp = traj.actor_logp_row(i);
        let mut mass = 0.0;
        for (&l, &lq) in lp.iter().zip(q.log_probs()) {
            let p = l.exp();
            mass += p;
            loss += p * (l - lq);
        }
        for (j, u) in upstream.iter_mut().enumerate() {
            *u = if q.clamped(j) {
                0.0
            } else {
                (q.log_probs()[j].exp() * mass - lp[j].exp()) / n
            };
        }
        backward_accumulate(adversary, tape, &upstream, grad)?;
    }
    Ok(AdversaryLoss { loss: loss / n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agac::testutil::{tiny_nets, tiny_traj};
    use crate::nn::{forward, Role};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn policy_value(actor: &ParamSet, t: &Trajectory, idx: &[usize], adv: &[f64]) -> f64 {
        let mut g = vec![0.0; actor.len()];
        ppo_policy_loss(actor, t, idx, adv, 0.2, 0.01, &mut Tape::default(), &mut g)
            .unwrap()
            .loss
    }

    #[test]
    fn unit_ratio_gives_negative_mean_advantage() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (actor, _, _) = tiny_nets(&mut rng);
        let mut t = tiny_traj(&mut rng, &actor, 12);
        let idx: Vec<usize> = (0..t.len()).collect();
        let adv: Vec<f64> = (0..t.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // old log-probs equal to the current ones
        for i in 0..t.len() {
            let (z, _) = forward(
                &actor,
                Input::OneHot {
                    dim: t.obs_dim,
                    active: &t.obs[i],
                },
            )
            .unwrap();
            t.logp_old[i] = CategoricalDist::from_logits(&z).log_prob(t.actions[i]).unwrap();
        }
        let mut g = vec![0.0; actor.len()];
        let out = ppo_policy_loss(&actor, &t, &idx, &adv, 0.2, 0.0, &mut Tape::default(), &mut g).unwrap();
        let mean = adv.iter().sum::<f64>() / adv.len() as f64;
        assert!((out.loss + mean).abs() < 1e-12);
        assert_eq!(out.clip_fraction, 0.0);
    }

    #[test]
    fn clipped_branch_selected_above_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (actor, _, _) = tiny_nets(&mut rng);
        let mut t = tiny_traj(&mut rng, &actor, 1);
        let (z, _) = forward(
            &actor,
            Input::OneHot {
                dim: t.obs_dim,
                active: &t.obs[0],
            },
        )
        .unwrap();
        let logp = CategoricalDist::from_logits(&z).log_prob(t.actions[0]).unwrap();
        // ratio = 1 + 2ε
        t.logp_old[0] = logp - 1.4f64.ln();
        let mut g = vec![0.0; actor.len()];
        let out = ppo_policy_loss(&actor, &t, &[0], &[0.5], 0.2, 0.0, &mut Tape::default(), &mut g).unwrap();
        assert!((out.loss + 1.2 * 0.5).abs() < 1e-12);
        assert_eq!(out.clip_fraction, 1.0);
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn policy_loss_matches_scalar_reevaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (actor, _, _) = tiny_nets(&mut rng);
        let t = tiny_traj(&mut rng, &actor, 20);
        let idx: Vec<usize> = (0..t.len()).step_by(2).collect();
        let adv: Vec<f64> = (0..t.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut expect = 0.0;
        for &i in &idx {
            let (z, _) = forward(
                &actor,
                Input::Dense(
                    &Input::OneHot {
                        dim: t.obs_dim,
                        active: &t.obs[i],
                    }
                    .to_dense(),
                ),
            )
            .unwrap();
            let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = z.iter().map(|v| (v - m).exp()).sum();
            let p: Vec<f64> = z.iter().map(|v| (v - m).exp() / s).collect();
            let h: f64 = -p.iter().map(|x| x * x.ln()).sum::<f64>();
            let r = p[t.actions[i]] / t.logp_old[i].exp();
            let clipped = r.clamp(0.8, 1.2);
            expect += -(r * adv[i]).min(clipped * adv[i]) - 0.01 * h;
        }
        expect /= idx.len() as f64;
        assert!((policy_value(&actor, &t, &idx, &adv) - expect).abs() < 1e-12);
    }

    #[test]
    fn value_loss_hand_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (_, mut critic, _) = tiny_nets(&mut rng);
        critic.as_mut_slice().iter_mut().for_each(|x| *x = 0.0);
        let t = tiny_traj(&mut rng, &critic, 1);
        let mut g = vec![0.0; critic.len()];
        let out = value_loss(&critic, &t, &[0], &[0.8], &mut Tape::default(), &mut g).unwrap();
        assert!((out.loss - 0.64).abs() < 1e-15);
        let out = value_loss(
            &critic,
            &t,
            &[0],
            &[0.0],
            &mut Tape::default(),
            &mut vec![0.0; critic.len()],
        )
        .unwrap();
        assert_eq!(out.loss, 0.0);
    }

    #[test]
    fn adversary_loss_vanishes_when_matching() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (actor, _, _) = tiny_nets(&mut rng);
        let mut t = tiny_traj(&mut rng, &actor, 10);
        for i in 0..t.len() {
            let (z, _) = forward(
                &actor,
                Input::OneHot {
                    dim: t.obs_dim,
                    active: &t.obs[i],
                },
            )
            .unwrap();
            t.actor_logp_old[i * 4..(i + 1) * 4].copy_from_slice(CategoricalDist::from_logits(&z).log_probs());
        }
        let adv = ParamSet::from_parts(Role::Adversary, actor.shapes().to_vec(), actor.as_slice().to_vec()).unwrap();
        let idx: Vec<usize> = (0..t.len()).collect();
        let mut g = vec![0.0; adv.len()];
        let out = adversary_loss(&adv, &t, &idx, &mut Tape::default(), &mut g).unwrap();
        assert!(out.loss.abs() < 1e-14);
        assert!(g.iter().all(|x| x.abs() < 1e-14));
    }
}

#[cfg(test)]
mod gradient_tests {
    use super::*;
    use crate::agac::testutil::{tiny_nets, tiny_traj};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check(params: &ParamSet, mut loss: impl FnMut(&ParamSet, &mut [f64]) -> f64) {
        let mut analytic = vec![0.0; params.len()];
        loss(params, &mut analytic);
        let h = 1e-6;
        let mut p = params.clone();
        let mut scratch = vec![0.0; params.len()];
        let numeric: Vec<f64> = (0..params.len())
            .map(|k| {
                let x = p.as_slice()[k];
                p.as_mut_slice()[k] = x + h;
                let up = loss(&p, &mut scratch);
                p.as_mut_slice()[k] = x - h;
                let down = loss(&p, &mut scratch);
                p.as_mut_slice()[k] = x;
                (up - down) / (2.0 * h)
            })
            .collect();
        let diff: f64 = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let rel = diff / (norm(&analytic) + norm(&numeric)).max(1e-12);
        assert!(rel < 1e-4, "relative error {rel}");
    }

    #[test]
    fn all_three_losses_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (actor, critic, adversary) = tiny_nets(&mut rng);
            let t = tiny_traj(&mut rng, &actor, 16);
            let idx: Vec<usize> = (0..t.len()).collect();
            let adv: Vec<f64> = (0..t.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let targets: Vec<f64> = (0..t.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut tape = Tape::default();
            check(&actor, |p, g| {
                g.iter_mut().for_each(|x| *x = 0.0);
                ppo_policy_loss(p, &t, &idx, &adv, 0.2, 0.01, &mut tape, g)
                    .unwrap()
                    .loss
            });
            check(&critic, |p, g| {
                g.iter_mut().for_each(|x| *x = 0.0);
                value_loss(p, &t, &idx, &targets, &mut tape, g).unwrap().loss
            });
            check(&adversary, |p, g| {
                g.iter_mut().for_each(|x| *x = 0.0);
                adversary_loss(p, &t, &idx, &mut tape, g).unwrap().loss
            });
        }
    }
}
