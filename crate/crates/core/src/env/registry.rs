use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{solve, EnvError, GridState, KeyCorridor, MultiRoom, MAX_GENERATION_ATTEMPTS};

/// A family of procedurally generated layouts.
pub trait LayoutGenerator: Send + Sync + fmt::Debug {
    /// Canonical descriptor without the reward-free suffix, e.g. `MultiRoom-N4-S5`.
    fn descriptor(&self) -> String;

    fn max_steps(&self) -> u32;

    /// One placement attempt. `None` signals a collision; the caller re-rolls.
    fn try_layout(&self, rng: &mut ChaCha8Rng, scenario: &Scenario, seed: u64) -> Option<GridState>;
}

/// Builds a generator from the `(letter, value)` parameters of a descriptor.
pub type GeneratorCtor = fn(&[(char, u32)]) -> Result<Arc<dyn LayoutGenerator>, String>;

pub struct ScenarioRegistry {
    families: BTreeMap<String, GeneratorCtor>,
}

impl Default for ScenarioRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl ScenarioRegistry {
    pub fn empty() -> Self {
        Self {
            families: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("MultiRoom", MultiRoom::from_params);
        r.register("KeyCorridor", KeyCorridor::from_params);
        r
    }

    pub fn register(&mut self, family: impl Into<String>, ctor: GeneratorCtor) {
        self.families.insert(family.into(), ctor);
    }

    pub fn families(&self) -> impl Iterator<Item = &str> {
        self.families.keys().map(|s| s.as_str())
    }

    /// Parses `Family-X1-Y2[-rf]`.
    pub fn parse(&self, descriptor: &str) -> Result<Scenario, EnvError> {
        let bad = |reason: &str| EnvError::BadDescriptor {
            descriptor: descriptor.to_string(),
            reason: reason.to_string(),
        };
        let mut parts: Vec<&str> = descriptor.trim().split('-').collect();
        let reward_free = parts.last() == Some(&"rf");
        if reward_free {
            parts.pop();
        }
        let (family, rest) = parts.split_first().ok_or_else(|| bad("empty descriptor"))?;
        let ctor = self
            .families
            .get(*family)
            .ok_or_else(|| EnvError::UnknownFamily(family.to_string()))?;
        let mut params = Vec::new();
        for p in rest {
            let mut chars = p.chars();
            let letter = chars.next().ok_or_else(|| bad("empty parameter"))?;
            let value: u32 = chars
                .as_str()
                .parse()
                .map_err(|_| bad(&format!("parameter {p:?} is not a letter followed by an integer")))?;
            params.push((letter, value));
        }
        let generator = ctor(&params).map_err(|reason| bad(&reason))?;
        Ok(Scenario { generator, reward_free })
    }
}

/// A layout family plus the reward-free flag.
#[derive(Clone)]
pub struct Scenario {
    generator: Arc<dyn LayoutGenerator>,
    reward_free: bool,
}

impl Scenario {
    pub fn new(generator: Arc<dyn LayoutGenerator>) -> Self {
        Self {
            generator,
            reward_free: false,
        }
    }

    pub fn reward_free(&self) -> bool {
        self.reward_free
    }

    pub fn with_reward_free(&self, flag: bool) -> Self {
        Self {
            generator: Arc::clone(&self.generator),
            reward_free: flag,
        }
    }

    pub fn max_steps(&self) -> u32 {
        self.generator.max_steps()
    }

    pub fn generator(&self) -> &dyn LayoutGenerator {
        self.generator.as_ref()
    }

    pub fn generate(&self, seed: u64) -> Result<GridState, EnvError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _attempt in 0..MAX_GENERATION_ATTEMPTS {
            let Some(state) = self.generator.try_layout(&mut rng, self, seed) else {
                continue;
            };
            if solve(&state).is_some() {
                return Ok(state);
            }
        }
        Err(EnvError::GenerationFailed {
            scenario: self.to_string(),
            seed,
            attempts: MAX_GENERATION_ATTEMPTS,
        })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.generator.descriptor())?;
        if self.reward_free {
            write!(f, "-rf")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scenario({self})")
    }
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

impl FromStr for Scenario {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioRegistry::with_builtins().parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_builtin_descriptors() {
        let s: Scenario = "MultiRoom-N4-S5".parse().unwrap();
        assert_eq!(s.to_string(), "MultiRoom-N4-S5");
        assert_eq!(s.max_steps(), 80);
        let k: Scenario = "KeyCorridor-S3-R3-rf".parse().unwrap();
        assert!(k.reward_free());
        assert_eq!(k.to_string(), "KeyCorridor-S3-R3-rf");
        assert_eq!(k.max_steps(), 270);
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert!(matches!("Maze-N2".parse::<Scenario>(), Err(EnvError::UnknownFamily(_))));
        assert!("MultiRoom-N1-S5".parse::<Scenario>().is_err());
        assert!("MultiRoom-N2-S3".parse::<Scenario>().is_err());
        assert!("MultiRoom-N2".parse::<Scenario>().is_err());
        assert!("MultiRoom-Nx-S4".parse::<Scenario>().is_err());
    }

    #[test]
    fn registry_accepts_new_families() {
        let mut r = ScenarioRegistry::empty();
        assert!(r.parse("MultiRoom-N2-S4").is_err());
        r.register("Rooms", MultiRoom::from_params);
        assert_eq!(r.parse("Rooms-N2-S4").unwrap().to_string(), "MultiRoom-N2-S4");
        assert_eq!(r.families().collect::<Vec<_>>(), vec!["Rooms"]);
    }
}
