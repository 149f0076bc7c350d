use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agac::{AgacConfig, AgacError, AlgorithmRegistry};
use crate::env::Scenario;
use crate::tabular::AdversaryRuleRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Train,
    EvalRewardFree,
    TabularPi,
    Heatmap,
}

/// Settings of the tabular policy-iteration mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TabularSpec {
    /// Plain-text MDP file; a random instance is drawn when absent.
    pub mdp_file: Option<PathBuf>,
    pub states: usize,
    pub actions: usize,
    pub gamma: f64,
    pub c: f64,
    pub alpha: f64,
    pub rule: String,
    pub iterations: usize,
}

impl Default for TabularSpec {
    fn default() -> Self {
        Self {
            mdp_file: None,
            states: 5,
            actions: 3,
            gamma: 0.9,
            c: 0.1,
            alpha: 0.1,
            rule: "ema".into(),
            iterations: 50,
        }
    }
}

/// One experiment: hyperparameters, scenario, seeds and outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSpec {
    pub mode: Mode,
    pub scenario: String,
    pub algorithm: String,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Episodes per heatmap window.
    pub heatmap_window: usize,
    /// Actor checkpoint directory for the heatmap mode.
    pub checkpoint: Option<PathBuf>,
    pub agac: AgacConfig,
    pub tabular: TabularSpec,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            mode: Mode::Train,
            scenario: "MultiRoom-N2-S4".into(),
            algorithm: "agac".into(),
            seeds: vec![0, 1, 2],
            output_dir: PathBuf::from("runs"),
            heatmap_window: 10,
            checkpoint: None,
            agac: AgacConfig::default(),
            tabular: TabularSpec::default(),
        }
    }
}

impl RunSpec {
    pub fn scenario(&self) -> Result<Scenario, HarnessError> {
        self.scenario
            .parse()
            .map_err(|e: crate::env::EnvError| HarnessError::keyed("scenario", &e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.agac.validate().map_err(|e| match e {
            AgacError::Config { field, message } => HarnessError::Config {
                line: None,
                key: Some(field.to_string()),
                message: format!("agac.{field}: {message}"),
            },
            other => HarnessError::config(None, other.to_string()),
        })?;
        if self.seeds.is_empty() {
            return Err(HarnessError::keyed("seeds", "at least one seed is required"));
        }
        if self.heatmap_window == 0 {
            return Err(HarnessError::keyed("heatmap_window", "must be at least 1"));
        }
        self.scenario()?;
        AlgorithmRegistry::with_builtins()
            .get(&self.algorithm)
            .map_err(|e| HarnessError::keyed("algorithm", &e.to_string()))?;
        AdversaryRuleRegistry::with_builtins()
            .get(&self.tabular.rule)
            .map_err(|e| HarnessError::keyed("rule", &e.to_string()))?;
        let t = &self.tabular;
        if !(t.alpha > 0.0) || !(t.c >= 0.0) || !(0.0..1.0).contains(&t.gamma) || t.states == 0 || t.actions == 0 {
            return Err(HarnessError::keyed(
                "tabular",
                "need alpha > 0, c >= 0, gamma in [0, 1) and non-empty sizes",
            ));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run specs serialize")
    }
}

/// Parses a TOML run description; omitted keys take their defaults.
pub fn parse_config_str(text: &str) -> Result<RunSpec, HarnessError> {
    let spec: RunSpec = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        HarnessError::config(line, e.message().to_string())
    })?;
    spec.validate().map_err(|e| match e {
        HarnessError::Config {
            line: None,
            key: Some(key),
            message,
        } => HarnessError::Config {
            line: key_line(text, &key),
            key: Some(key),
            message,
        },
        other => other,
    })?;
    Ok(spec)
}

pub fn parse_config(path: &Path) -> Result<RunSpec, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_config_str(&text)
}

fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
                || l.strip_prefix('[')
                    .and_then(|r| r.strip_prefix(key))
                    .is_some_and(|r| r.starts_with(']'))
        })
        .map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let spec = parse_config_str("").unwrap();
        assert_eq!(spec, RunSpec::default());
        assert_eq!(spec.agac.c0, 4e-4);
        assert_eq!(spec.agac.adversary_coef, 4e-5);
        assert_eq!(spec.agac.lr_ratio, 0.3);
    }

    #[test]
    fn range_error_names_the_line() {
        let text = "scenario = \"MultiRoom-N2-S4\"\n[agac]\ngamma = 0.99\nclip_epsilon = 1.5\n";
        match parse_config_str(text) {
            Err(HarnessError::Config { line, message, .. }) => {
                assert_eq!(line, Some(4));
                assert!(message.contains("clip_epsilon"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        match parse_config_str("seeds = [1]\n[agac]\nlearning_rate = 0.1\n") {
            Err(HarnessError::Config { line, message, .. }) => {
                assert_eq!(line, Some(3));
                assert!(message.contains("learning_rate"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_config_str("seedz = [1]").is_err());
        assert!(parse_config_str("seeds = []").is_err());
        assert!(parse_config_str("scenario = \"Maze-N2\"").is_err());
        assert!(parse_config_str("algorithm = \"dqn\"").is_err());
    }

    #[test]
    fn scenario_and_table_errors_carry_lines() {
        let e = parse_config_str("seeds = [1]\nscenario = \"Maze-N2\"\n").unwrap_err();
        assert!(matches!(e, HarnessError::Config { line: Some(2), .. }), "{e}");
        let e = parse_config_str("# run\n\n[tabular]\nalpha = 0.0\n").unwrap_err();
        assert!(matches!(e, HarnessError::Config { line: Some(3), .. }), "{e}");
    }

    #[test]
    fn defaults_round_trip() {
        let spec = RunSpec {
            checkpoint: Some("ckpt".into()),
            mode: Mode::EvalRewardFree,
            ..Default::default()
        };
        assert_eq!(parse_config_str(&spec.to_toml()).unwrap(), spec);
        let d = RunSpec::default();
        assert_eq!(parse_config_str(&d.to_toml()).unwrap(), d);
    }
}
