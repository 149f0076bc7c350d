use rand::Rng;

use super::NnError;

/// Logits are clamped to this range before normalization.
pub const LOGIT_CLAMP: f64 = 30.0;

/// Categorical distribution held in log space.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalDist {
    logits: Vec<f64>,
    log_probs: Vec<f64>,
}

impl CategoricalDist {
    pub fn from_logits(logits: &[f64]) -> Self {
        let logits: Vec<f64> = logits.iter().map(|z| z.clamp(-LOGIT_CLAMP, LOGIT_CLAMP)).collect();
        let (arg, max) =
            logits.iter().copied().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, z)| if z > acc.1 { (i, z) } else { acc },
            );
        // ln(1 + rest) keeps precision when one logit dominates
        let rest: f64 = logits
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != arg)
            .map(|(_, z)| (z - max).exp())
            .sum();
        let log_norm = rest.ln_1p();
        let log_probs = logits.iter().map(|z| (z - max) - log_norm).collect();
        Self { logits, log_probs }
    }

    /// Builds a distribution from probabilities (used by tests and the tabular code).
    pub fn from_probs(probs: &[f64]) -> Self {
        let logits: Vec<f64> = probs.iter().map(|p| p.max(1e-300).ln()).collect();
        Self::from_logits(&logits)
    }

    pub fn len(&self) -> usize {
        self.logits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logits.is_empty()
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|l| l.exp()).collect()
    }

    pub fn log_prob(&self, action: usize) -> Result<f64, NnError> {
        self.log_probs.get(action).copied().ok_or(NnError::ActionOutOfRange {
            action,
            actions: self.len(),
        })
    }

    pub fn entropy(&self) -> f64 {
        -self
            .log_probs
            .iter()
            .map(|&l| if l == f64::NEG_INFINITY { 0.0 } else { l.exp() * l })
            .sum::<f64>()
    }

    /// KL(self ‖ other).
    pub fn kl(&self, other: &CategoricalDist) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.log_probs
            .iter()
            .zip(&other.log_probs)
            .map(|(&lp, &lq)| lp.exp() * (lp - lq))
            .sum::<f64>()
            .max(0.0)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (a, l) in self.log_probs.iter().enumerate() {
            acc += l.exp();
            if u < acc {
                return a;
            }
        }
        self.len() - 1
    }

    /// Whether a logit sits on the clamp boundary (its gradient is then zero).
    pub fn clamped(&self, action: usize) -> bool {
        self.logits[action].abs() >= LOGIT_CLAMP
    }
}

pub fn dist_logprob(dist: &CategoricalDist, action: usize) -> Result<f64, NnError> {
    dist.log_prob(action)
}

pub fn dist_entropy(dist: &CategoricalDist) -> f64 {
    dist.entropy()
}

pub fn dist_kl(p: &CategoricalDist, q: &CategoricalDist) -> f64 {
    p.kl(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_logprob_and_entropy() {
        let d = CategoricalDist::from_logits(&[0.0; 4]);
        assert!((d.log_prob(2).unwrap() - 0.25f64.ln()).abs() < 1e-15);
        assert!((d.entropy() - 4f64.ln()).abs() < 1e-15);
        assert!(matches!(d.log_prob(4), Err(NnError::ActionOutOfRange { .. })));
    }

    #[test]
    fn saturated_logprob_is_near_zero() {
        // log(1 / (1 + e^-20)) = -ln(1 + 2.061153622438558e-9)
        let d = CategoricalDist::from_logits(&[10.0, -10.0]);
        let expected = -(2.061_153_622_438_558e-9f64).ln_1p();
        assert!((d.log_prob(0).unwrap() - expected).abs() < 1e-22);
        assert!((d.log_prob(0).unwrap() + 2.06e-9).abs() < 1e-11);
    }

    #[test]
    fn entropy_cases() {
        let one_hot = CategoricalDist::from_logits(&[40.0, 0.0, 0.0, 0.0]);
        assert!(one_hot.entropy() < 1e-10);
        let d = CategoricalDist::from_probs(&[0.8, 0.2]);
        let expected = -(0.8f64 * 0.8f64.ln() + 0.2 * 0.2f64.ln());
        assert!((d.entropy() - expected).abs() < 1e-12);
    }

    #[test]
    fn kl_cases() {
        let p = CategoricalDist::from_probs(&[0.3, 0.7]);
        assert_eq!(p.kl(&p), 0.0);
        let near = CategoricalDist::from_probs(&[1.0 - 1e-9, 1e-9]);
        let uniform = CategoricalDist::from_logits(&[0.0, 0.0]);
        assert!((near.kl(&uniform) - 2f64.ln()).abs() < 1e-7);
        let a = CategoricalDist::from_probs(&[0.8, 0.2]);
        let b = CategoricalDist::from_probs(&[0.2, 0.8]);
        assert!((a.kl(&b) - 0.6 * 4f64.ln()).abs() < 1e-12);
        assert!((b.kl(&a) - 0.6 * 4f64.ln()).abs() < 1e-12);
        let c = CategoricalDist::from_probs(&[0.9, 0.1]);
        let u = CategoricalDist::from_probs(&[0.5, 0.5]);
        // KL(c‖u) = 0.9 ln 1.8 + 0.1 ln 0.2; KL(u‖c) = 0.5 ln(5/9) + 0.5 ln 5
        let cu = 0.9 * 1.8f64.ln() + 0.1 * 0.2f64.ln();
        let uc = 0.5 * (5.0f64 / 9.0).ln() + 0.5 * 5f64.ln();
        assert!((c.kl(&u) - cu).abs() < 1e-12);
        assert!((u.kl(&c) - uc).abs() < 1e-12);
        assert!((cu - uc).abs() > 0.1);
    }

    #[test]
    fn huge_logits_stay_finite() {
        let d = CategoricalDist::from_logits(&[1e6, -1e6, 0.0]);
        assert!(d.log_probs().iter().all(|l| l.is_finite()));
    }

    proptest! {
        #[test]
        fn normalized_and_bounded(logits in prop::collection::vec(-50.0f64..50.0, 2..9),
                                  other in prop::collection::vec(-50.0f64..50.0, 9)) {
            let p = CategoricalDist::from_logits(&logits);
            let q = CategoricalDist::from_logits(&other[..logits.len()]);
            let total: f64 = p.probs().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-6);
            prop_assert!(p.log_probs().iter().all(|l| l.is_finite()));
            let h = p.entropy();
            prop_assert!(h >= 0.0 && h <= (p.len() as f64).ln() + 1e-12);
            prop_assert!(p.kl(&q) >= 0.0);
            prop_assert!(p.kl(&p).abs() < 1e-12);
        }
    }
}
