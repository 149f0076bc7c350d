use std::collections::VecDeque;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::heatmap::{emit_heatmap, HeatmapReport};
use super::metrics::{summarize, write_summary, EpisodeStats, MetricsRow, MetricsWriter};
use super::{HarnessError, RunSpec};
use crate::agac::{derive_seed, Agent, AlgorithmRegistry, Trainer};
use crate::env::{Scenario, NUM_ACTIONS, OBS_INPUT_DIM};
use crate::nn::{ParamSet, Role};
use crate::rollout::dump::write_trajectory;
use crate::rollout::{EpisodeRecord, Policies, VecEnv};
use crate::tabular::{run_pi, write_trace_csv, AdversaryRuleRegistry, PiTraceRow, TabularMdp, TabularPolicy};

/// Complete coverage windows averaged for the end-of-training figure.
pub const FINAL_WINDOWS: usize = 10;

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub rows: Vec<MetricsRow>,
    pub stats: EpisodeStats,
    pub heatmap: HeatmapReport,
}

impl SeedOutcome {
    pub fn final_return(&self) -> f64 {
        self.stats.rolling_return()
    }

    pub fn final_coverage(&self) -> f64 {
        self.stats.final_coverage(FINAL_WINDOWS)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub final_return_rolling100: f64,
    pub final_coverage_window10: f64,
    pub goal_fraction: f64,
    pub episodes: u64,
    pub max_rooms_in_heatmap_episode: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BaselineReport {
    pub episodes: u64,
    pub goal_fraction: f64,
    pub coverage_window10: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub outcomes: Vec<SeedOutcome>,
    pub failures: Vec<(u64, String)>,
    pub baseline: Option<BaselineReport>,
}

impl RunReport {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summaries(&self) -> Vec<SeedSummary> {
        self.outcomes
            .iter()
            .map(|o| SeedSummary {
                seed: o.seed,
                final_return_rolling100: o.final_return(),
                final_coverage_window10: o.final_coverage(),
                goal_fraction: o.stats.goal_fraction(),
                episodes: o.stats.episodes,
                max_rooms_in_heatmap_episode: o.heatmap.rooms_per_episode.iter().copied().max().unwrap_or(0),
            })
            .collect()
    }
}

fn train_seed(spec: &RunSpec, scenario: &Scenario, seed: u64, dir: &Path) -> Result<SeedOutcome, HarnessError> {
    let algo = AlgorithmRegistry::with_builtins().get(&spec.algorithm)?;
    let mut trainer = Trainer::new(spec.agac.clone(), scenario.clone(), algo, seed)?;
    let mut writer = MetricsWriter::create(dir)?;
    let mut stats = EpisodeStats::default();
    let mut recent: VecDeque<EpisodeRecord> = VecDeque::with_capacity(spec.heatmap_window + 1);
    let mut rows = Vec::new();
    while !trainer.finished() {
        let (m, episodes) = trainer.step()?;
        for ep in episodes {
            stats.record(&ep);
            recent.push_back(ep);
            if recent.len() > spec.heatmap_window {
                recent.pop_front();
            }
        }
        let row = stats.row(&m);
        writer.append(&row)?;
        rows.push(row);
    }
    writer.finish()?;
    trainer.agent.save(&dir.join("checkpoint"))?;
    if let Some(traj) = trainer.last_batch() {
        let path = dir.join("last-batch.traj");
        let file = std::fs::File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
        let mut w = std::io::BufWriter::new(file);
        write_trajectory(&mut w, traj).map_err(|e| HarnessError::Output(e.to_string()))?;
        w.flush().map_err(|e| HarnessError::io(&path, e))?;
    }
    let recent: Vec<EpisodeRecord> = recent.into();
    let heatmap = emit_heatmap(
        &recent,
        spec.heatmap_window,
        &scenario.to_string(),
        seed,
        &dir.join("heatmap"),
    )?;
    Ok(SeedOutcome {
        seed,
        rows,
        stats,
        heatmap,
    })
}

fn run_seeds(spec: &RunSpec, scenario: &Scenario) -> Result<RunReport, HarnessError> {
    spec.validate()?;
    let out = &spec.output_dir;
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let spec_path = out.join("spec.toml");
    std::fs::write(&spec_path, spec.to_toml()).map_err(|e| HarnessError::io(&spec_path, e))?;
    let mut report = RunReport::default();
    for &seed in &spec.seeds {
        match train_seed(spec, scenario, seed, &out.join(format!("seed-{seed}"))) {
            Ok(o) => report.outcomes.push(o),
            Err(e) => report.failures.push((seed, e.to_string())),
        }
    }
    let runs: Vec<Vec<MetricsRow>> = report.outcomes.iter().map(|o| o.rows.clone()).collect();
    write_summary(&out.join("summary.csv"), &summarize(&runs))?;
    Ok(report)
}

fn write_report(spec: &RunSpec, report: &RunReport) -> Result<(), HarnessError> {
    let path = spec.output_dir.join("report.json");
    let body = serde_json::json!({
        "scenario": spec.scenario,
        "algorithm": spec.algorithm,
        "seeds": report.summaries(),
        "failures": report.failures.iter().map(|(s, e)| serde_json::json!({"seed": s, "error": e})).collect::<Vec<_>>(),
        "random_baseline": report.baseline,
    });
    let text = serde_json::to_string_pretty(&body).map_err(|e| HarnessError::Output(e.to_string()))?;
    std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))
}

/// Trains every seed to the frame budget, writing per-seed metrics,
/// checkpoints and heatmaps plus a cross-seed `summary.csv`.
pub fn run_train(spec: &RunSpec) -> Result<RunReport, HarnessError> {
    let report = run_seeds(spec, &spec.scenario()?)?;
    write_report(spec, &report)?;
    Ok(report)
}

/// Trains with extrinsic reward forced to zero and the goal hidden, and
/// records a uniform-random baseline on the same scenario.
pub fn run_reward_free(spec: &RunSpec) -> Result<RunReport, HarnessError> {
    let scenario = spec.scenario()?.with_reward_free(true);
    let mut report = run_seeds(spec, &scenario)?;
    report.baseline = Some(random_baseline(&scenario, 200, spec.seeds[0])?);
    write_report(spec, &report)?;
    Ok(report)
}

/// Runs a uniform policy for at least `episodes` episodes.
pub fn random_baseline(scenario: &Scenario, episodes: u64, seed: u64) -> Result<BaselineReport, HarnessError> {
    let actor = ParamSet::mlp(Role::Actor, &[OBS_INPUT_DIM, NUM_ACTIONS])?;
    let critic = ParamSet::mlp(Role::Critic, &[OBS_INPUT_DIM, 1])?;
    let mut envs =
        VecEnv::new(scenario.clone(), 16, derive_seed(seed, 5), false).map_err(crate::agac::AgacError::from)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 6));
    let mut stats = EpisodeStats::default();
    while stats.episodes < episodes {
        let nets = Policies {
            actor: &actor,
            critic: &critic,
            adversary: None,
        };
        let (_, eps) = envs
            .collect(nets, 128, &mut rng)
            .map_err(crate::agac::AgacError::from)?;
        eps.iter().for_each(|e| stats.record(e));
    }
    Ok(BaselineReport {
        episodes: stats.episodes,
        goal_fraction: stats.goal_fraction(),
        coverage_window10: stats.final_coverage(usize::MAX),
    })
}

/// Rolls out a saved actor for `heatmap_window` episodes and draws them.
pub fn heatmap_from_checkpoint(spec: &RunSpec, checkpoint: &Path) -> Result<HeatmapReport, HarnessError> {
    spec.validate()?;
    let actor = Agent::load_actor(checkpoint)?;
    let critic = ParamSet::mlp(Role::Critic, &[actor.input_dim(), 1])?;
    let scenario = spec.scenario()?;
    let seed = spec.seeds[0];
    let mut envs =
        VecEnv::new(scenario.clone(), 1, derive_seed(seed, 7), false).map_err(crate::agac::AgacError::from)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 8));
    let mut episodes = Vec::new();
    while episodes.len() < spec.heatmap_window {
        let nets = Policies {
            actor: &actor,
            critic: &critic,
            adversary: None,
        };
        let (_, eps) = envs.collect(nets, 64, &mut rng).map_err(crate::agac::AgacError::from)?;
        episodes.extend(eps);
    }
    episodes.truncate(spec.heatmap_window);
    emit_heatmap(
        &episodes,
        spec.heatmap_window,
        &scenario.to_string(),
        seed,
        &spec.output_dir.join("heatmap"),
    )
}

/// Policy iteration on the configured (or a random) MDP; writes `trace.csv`.
pub fn run_tabular(spec: &RunSpec) -> Result<Vec<PiTraceRow>, HarnessError> {
    spec.validate()?;
    let t = &spec.tabular;
    let mdp = match &t.mdp_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            TabularMdp::parse(&text)?
        }
        None => TabularMdp::random(
            &mut ChaCha8Rng::seed_from_u64(spec.seeds[0]),
            t.states,
            t.actions,
            t.gamma,
        ),
    };
    let rule = AdversaryRuleRegistry::with_builtins().get(&t.rule)?;
    let uniform = TabularPolicy::uniform(mdp.n_states(), mdp.n_actions());
    let pi0 = TabularPolicy::random(
        &mut ChaCha8Rng::seed_from_u64(derive_seed(spec.seeds[0], 1)),
        mdp.n_states(),
        mdp.n_actions(),
        1.0,
    );
    let (_, rows) = run_pi(&mdp, pi0, uniform, t.c, t.alpha, rule.as_ref(), t.iterations)?;
    std::fs::create_dir_all(&spec.output_dir).map_err(|e| HarnessError::io(&spec.output_dir, e))?;
    let path = spec.output_dir.join("trace.csv");
    let file = std::fs::File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
    write_trace_csv(file, &rows)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub c0: f64,
    pub lr_ratio: f64,
    pub final_return_mean: f64,
    pub final_return_std: f64,
    pub final_coverage_mean: f64,
    pub failures: usize,
}

/// Grid over c0 ∈ {c/4, c, 4c} and ν ∈ {0.1, 0.3, 1.0} around the configured c0.
pub fn run_sweep(spec: &RunSpec) -> Result<Vec<SweepRow>, HarnessError> {
    spec.validate()?;
    let base = spec.agac.c0;
    let mut rows = Vec::new();
    for c0 in [base / 4.0, base, 4.0 * base] {
        for nu in [0.1, 0.3, 1.0] {
            let mut sub = spec.clone();
            sub.agac.c0 = c0;
            sub.agac.lr_ratio = nu;
            sub.output_dir = spec.output_dir.join(format!("c0-{c0:e}_nu-{nu}"));
            let report = run_train(&sub)?;
            let finals: Vec<f64> = report.outcomes.iter().map(SeedOutcome::final_return).collect();
            let covs: Vec<f64> = report.outcomes.iter().map(SeedOutcome::final_coverage).collect();
            let (m, s) = super::metrics::mean_std(&finals);
            rows.push(SweepRow {
                c0,
                lr_ratio: nu,
                final_return_mean: m,
                final_return_std: s,
                final_coverage_mean: super::metrics::mean_std(&covs).0,
                failures: report.failures.len(),
            });
        }
    }
    let path = spec.output_dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| HarnessError::Output(e.to_string()))?;
    for r in &rows {
        w.serialize(r).map_err(|e| HarnessError::Output(e.to_string()))?;
    }
    w.flush().map_err(|e| HarnessError::io(&path, e))?;
    Ok(rows)
}
