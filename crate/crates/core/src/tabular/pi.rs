use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{TabularError, TabularMdp, TabularPolicy, PROB_FLOOR};

/// Q table `q[s * A + a]`.
pub type QTable = Vec<f64>;

/// Exact Q^π from the linear system (I − γ P_π) V = r_π.
pub fn q_eval(mdp: &TabularMdp, pi: &TabularPolicy) -> Result<QTable, TabularError> {
    let v = v_eval(mdp, pi)?;
    Ok(q_from_v(mdp, &v))
}

pub fn v_eval(mdp: &TabularMdp, pi: &TabularPolicy) -> Result<Vec<f64>, TabularError> {
    let (ns, na) = (mdp.n_states(), mdp.n_actions());
    if pi.n_states() != ns || pi.n_actions() != na {
        return Err(TabularError::Invalid("policy and MDP sizes differ".into()));
    }
    let mut m = DMatrix::<f64>::identity(ns, ns);
    let mut r = DVector::<f64>::zeros(ns);
    for s in 0..ns {
        for a in 0..na {
            let w = pi.row(s)[a];
            r[s] += w * mdp.reward(s, a);
            for (s2, &p) in mdp.transition(s, a).iter().enumerate() {
                m[(s, s2)] -= mdp.gamma() * w * p;
            }
        }
    }
    let v = m.lu().solve(&r).ok_or(TabularError::Singular)?;
    Ok(v.iter().copied().collect())
}

/// r(s, a) + γ Σ P(s' | s, a) V(s').
pub fn q_from_v(mdp: &TabularMdp, v: &[f64]) -> QTable {
    let (ns, na) = (mdp.n_states(), mdp.n_actions());
    let mut q = vec![0.0; ns * na];
    for s in 0..ns {
        for a in 0..na {
            let next: f64 = mdp.transition(s, a).iter().zip(v).map(|(p, x)| p * x).sum();
            q[s * na + a] = mdp.reward(s, a) + mdp.gamma() * next;
        }
    }
    q
}

/// J_PI under a uniform state distribution, in two independently computed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiObjective {
    /// E_s E_{a∼π}[Q + c (log π_k − log π_adv) − α log π]
    pub direct: f64,
    /// E[Q] − c KL(π‖π_k) + c KL(π‖π_adv) + α H(π)
    pub decomposed: f64,
}

/// Terms with π(a|s) = 0 contribute zero.
pub fn pi_objective(
    pi: &TabularPolicy,
    pi_k: &TabularPolicy,
    pi_adv: &TabularPolicy,
    q: &[f64],
    c: f64,
    alpha: f64,
) -> PiObjective {
    let (ns, na) = (pi.n_states(), pi.n_actions());
    let mut direct = 0.0;
    let (mut eq, mut kl_k, mut kl_adv, mut ent) = (0.0, 0.0, 0.0, 0.0);
    for s in 0..ns {
        for a in 0..na {
            let p = pi.row(s)[a];
            if p == 0.0 {
                continue;
            }
            let (lp, lk, ladv) = (p.ln(), pi_k.floored_log(s, a), pi_adv.floored_log(s, a));
            let qa = q[s * na + a];
            direct += p * (qa + c * (lk - ladv) - alpha * lp);
            eq += p * qa;
            kl_k += p * (lp - lk);
            kl_adv += p * (lp - ladv);
            ent -= p * lp;
        }
    }
    let n = ns as f64;
    PiObjective {
        direct: direct / n,
        decomposed: (eq - c * kl_k + c * kl_adv + alpha * ent) / n,
    }
}

/// π_{k+1}(a|s) ∝ (π_k / π_adv)^{c/α} exp(Q/α), evaluated in log space.
pub fn closed_form_update(
    pi_k: &TabularPolicy,
    pi_adv: &TabularPolicy,
    q: &[f64],
    c: f64,
    alpha: f64,
) -> Result<TabularPolicy, TabularError> {
    if !(alpha > 0.0) || !(c >= 0.0) {
        return Err(TabularError::Invalid(format!(
            "need α > 0 and c ≥ 0, got α = {alpha}, c = {c}"
        )));
    }
    let (ns, na) = (pi_k.n_states(), pi_k.n_actions());
    let mut logw = vec![0.0; ns * na];
    for s in 0..ns {
        for a in 0..na {
            let ratio = pi_k.floored_log(s, a) - pi_adv.floored_log(s, a);
            logw[s * na + a] = (c / alpha) * ratio + q[s * na + a] / alpha;
        }
    }
    Ok(TabularPolicy::from_log_weights(ns, na, &logw))
}

/// With π_adv fixed and c = α, one AGAC step equals one KL(π‖π_k)-regularized
/// step on the reward r − c log π_adv. Returns the largest elementwise gap
/// between the two policies.
pub fn kl_regularized_reduction_check(
    mdp: &TabularMdp,
    pi_k: &TabularPolicy,
    pi_adv: &TabularPolicy,
    c: f64,
    alpha: f64,
) -> Result<f64, TabularError> {
    if c != alpha {
        return Err(TabularError::Precondition(format!(
            "requires c = α, got c = {c}, α = {alpha}"
        )));
    }
    let agac = closed_form_update(pi_k, pi_adv, &q_eval(mdp, pi_k)?, c, alpha)?;

    // modified immediate reward, continuation valued under π_k
    let (ns, na) = (mdp.n_states(), mdp.n_actions());
    let v = v_eval(mdp, pi_k)?;
    let mut reg = vec![0.0; ns * na];
    for s in 0..ns {
        let q_mod: Vec<f64> = (0..na)
            .map(|a| {
                let next: f64 = mdp.transition(s, a).iter().zip(&v).map(|(p, x)| p * x).sum();
                mdp.reward(s, a) - c * pi_adv.floored_log(s, a) + mdp.gamma() * next
            })
            .collect();
        // argmax_π E_π[q] − c KL(π‖π_k)  ⇒  π ∝ π_k exp(q / c)
        let logits: Vec<f64> = (0..na).map(|a| pi_k.floored_log(s, a) + q_mod[a] / c).collect();
        let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + logits.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
        for a in 0..na {
            reg[s * na + a] = (logits[a] - lse).exp().max(PROB_FLOOR);
        }
        let sum: f64 = reg[s * na..(s + 1) * na].iter().sum();
        reg[s * na..(s + 1) * na].iter_mut().for_each(|x| *x /= sum);
    }
    let reg = TabularPolicy::new(ns, na, reg)?;
    Ok(agac.max_abs_diff(&reg))
}

/// How π_adv follows the iterates.
pub trait AdversaryRule: Send + Sync + Debug {
    fn name(&self) -> &'static str;

    /// Adversary for iteration k + 1 given the current one, π_k and π_{k+1}.
    fn next(&self, adversary: &TabularPolicy, previous: &TabularPolicy, current: &TabularPolicy) -> TabularPolicy;
}

/// π_adv ← (1 − τ) π_adv + τ π_{k+1}.
#[derive(Debug, Clone, Copy)]
pub struct EmaRule {
    pub tau: f64,
}

impl Default for EmaRule {
    fn default() -> Self {
        Self { tau: 0.3 }
    }
}

impl AdversaryRule for EmaRule {
    fn name(&self) -> &'static str {
        "ema"
    }

    fn next(&self, adversary: &TabularPolicy, _previous: &TabularPolicy, current: &TabularPolicy) -> TabularPolicy {
        let probs = adversary
            .probs()
            .iter()
            .zip(current.probs())
            .map(|(a, b)| (1.0 - self.tau) * a + self.tau * b)
            .collect();
        TabularPolicy::new(current.n_states(), current.n_actions(), probs).expect("mixture of distributions")
    }
}

/// π_adv ← π_k, one iteration behind the actor.
#[derive(Debug, Clone, Copy, Default)]
pub struct PreviousRule;

impl AdversaryRule for PreviousRule {
    fn name(&self) -> &'static str {
        "previous"
    }

    fn next(&self, _adversary: &TabularPolicy, previous: &TabularPolicy, _current: &TabularPolicy) -> TabularPolicy {
        previous.clone()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FixedRule;

impl AdversaryRule for FixedRule {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn next(&self, adversary: &TabularPolicy, _previous: &TabularPolicy, _current: &TabularPolicy) -> TabularPolicy {
        adversary.clone()
    }
}

#[derive(Debug, Clone, Default)]
pub struct AdversaryRuleRegistry {
    rules: BTreeMap<String, Arc<dyn AdversaryRule>>,
}

impl AdversaryRuleRegistry {
    pub fn with_builtins() -> Self {
        let mut r = Self::default();
        r.register(Arc::new(EmaRule::default()));
        r.register(Arc::new(PreviousRule));
        r.register(Arc::new(FixedRule));
        r
    }

    pub fn register(&mut self, rule: Arc<dyn AdversaryRule>) {
        self.rules.insert(rule.name().to_string(), rule);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn AdversaryRule>, TabularError> {
        self.rules
            .get(name)
            .cloned()
            .ok_or_else(|| TabularError::UnknownRule(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.rules.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiIterate {
    pub iteration: usize,
    pub policy: TabularPolicy,
    pub adversary: TabularPolicy,
    pub q: QTable,
    pub c: f64,
    pub alpha: f64,
}

/// One CSV row of a policy-iteration trace, describing π_{k+1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiTraceRow {
    pub iteration: usize,
    pub objective: f64,
    pub kl_to_previous: f64,
    pub kl_to_adversary: f64,
    pub greedy_return: f64,
    pub entropy: f64,
}

/// Mean over states of KL(p(·|s) ‖ q(·|s)).
pub fn mean_kl(p: &TabularPolicy, q: &TabularPolicy) -> f64 {
    let (ns, na) = (p.n_states(), p.n_actions());
    let mut total = 0.0;
    for s in 0..ns {
        for a in 0..na {
            let x = p.row(s)[a];
            if x > 0.0 {
                total += x * (x.ln() - q.floored_log(s, a));
            }
        }
    }
    (total / ns as f64).max(0.0)
}

fn mean_entropy(p: &TabularPolicy) -> f64 {
    let h: f64 = p.probs().iter().filter(|&&x| x > 0.0).map(|x| -x * x.ln()).sum();
    h / p.n_states() as f64
}

/// Mean over start states of the greedy policy's value.
pub fn greedy_return(mdp: &TabularMdp, pi: &TabularPolicy) -> Result<f64, TabularError> {
    let v = v_eval(mdp, &pi.greedy())?;
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

/// Alternates exact evaluation and the closed-form update. The returned
/// iterates start with (π_0, π_adv,0); row k describes iterate k + 1.
pub fn run_pi(
    mdp: &TabularMdp,
    pi0: TabularPolicy,
    adv0: TabularPolicy,
    c: f64,
    alpha: f64,
    rule: &dyn AdversaryRule,
    iterations: usize,
) -> Result<(Vec<PiIterate>, Vec<PiTraceRow>), TabularError> {
    let mut iterates = vec![PiIterate {
        iteration: 0,
        q: q_eval(mdp, &pi0)?,
        policy: pi0,
        adversary: adv0,
        c,
        alpha,
    }];
    let mut rows = Vec::with_capacity(iterations);
    for k in 0..iterations {
        let cur = &iterates[k];
        let next = closed_form_update(&cur.policy, &cur.adversary, &cur.q, c, alpha)?;
        let objective = pi_objective(&next, &cur.policy, &cur.adversary, &cur.q, c, alpha).direct;
        rows.push(PiTraceRow {
            iteration: k + 1,
            objective,
            kl_to_previous: mean_kl(&next, &cur.policy),
            kl_to_adversary: mean_kl(&next, &cur.adversary),
            greedy_return: greedy_return(mdp, &next)?,
            entropy: mean_entropy(&next),
        });
        let adversary = rule.next(&cur.adversary, &cur.policy, &next);
        iterates.push(PiIterate {
            iteration: k + 1,
            q: q_eval(mdp, &next)?,
            policy: next,
            adversary,
            c,
            alpha,
        });
    }
    Ok((iterates, rows))
}

/// Writes trace rows as CSV with a header.
pub fn write_trace_csv<W: std::io::Write>(w: W, rows: &[PiTraceRow]) -> Result<(), TabularError> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| TabularError::Io(e.to_string()))?;
    }
    out.flush().map_err(|e| TabularError::Io(e.to_string()))?;
    Ok(())
}
