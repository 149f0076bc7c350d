use std::collections::HashMap;

use crate::env::Observation;

/// Per-episode visit counts keyed by the raw (unstacked) observation.
#[derive(Debug, Clone, Default)]
pub struct EpisodicCounter {
    counts: HashMap<Observation, u32>,
}

impl EpisodicCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.counts.clear();
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, obs: &Observation) -> u32 {
        self.counts.get(obs).copied().unwrap_or(0)
    }

    /// Records a visit and returns 1/sqrt(visits so far).
    pub fn visit(&mut self, obs: &Observation) -> f64 {
        let n = self.counts.entry(*obs).or_insert(0);
        *n += 1;
        1.0 / (*n as f64).sqrt()
    }
}

pub fn episodic_scale(counter: &mut EpisodicCounter, obs: &Observation) -> f64 {
    counter.visit(obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{generate, observe, Scenario};
    use proptest::prelude::*;

    fn two_obs() -> (Observation, Observation) {
        let s: Scenario = "MultiRoom-N2-S4".parse().unwrap();
        let mut g = generate(&s, 0).unwrap();
        let a = observe(&g);
        g.step_in_place(0).unwrap();
        (a, observe(&g))
    }

    #[test]
    fn scale_follows_inverse_sqrt() {
        let (a, _) = two_obs();
        let mut c = EpisodicCounter::new();
        assert_eq!(episodic_scale(&mut c, &a), 1.0);
        c.visit(&a);
        c.visit(&a);
        assert_eq!(episodic_scale(&mut c, &a), 0.5);
        c.reset();
        assert!(c.is_empty());
        assert_eq!(episodic_scale(&mut c, &a), 1.0);
    }

    proptest! {
        #[test]
        fn counts_never_leak_across_resets(ops in prop::collection::vec(0u8..3, 1..200)) {
            let (a, b) = two_obs();
            let mut c = EpisodicCounter::new();
            let (mut na, mut nb) = (0u32, 0u32);
            for op in ops {
                match op {
                    0 => { na += 1; let s = c.visit(&a); prop_assert_eq!(s, 1.0 / (na as f64).sqrt()); }
                    1 => { nb += 1; let s = c.visit(&b); prop_assert_eq!(s, 1.0 / (nb as f64).sqrt()); }
                    _ => { c.reset(); na = 0; nb = 0; prop_assert!(c.is_empty()); }
                }
                prop_assert_eq!(c.count(&a), na);
                prop_assert_eq!(c.count(&b), nb);
            }
        }
    }
}
