use std::path::PathBuf;
use std::process::ExitCode;

use agac::harness::{
    heatmap_from_checkpoint, parse_config, run_reward_free, run_sweep, run_tabular, run_train, Mode, RunReport, RunSpec,
};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "agac", version, about = "Adversarially guided actor-critic experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every seed to the frame budget.
    Train(Common),
    /// Train without extrinsic reward and report coverage.
    RewardFree(Common),
    /// Draw visitation heatmaps from a saved actor.
    Heatmap {
        #[command(flatten)]
        common: Common,
        /// Checkpoint directory holding actor.bin.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Exact policy iteration on a small MDP.
    TabularPi(Common),
    /// Grid over c0 and the adversary learning-rate ratio.
    Sweep(Common),
    /// Print the default configuration as TOML.
    Defaults,
}

#[derive(Args)]
struct Common {
    /// TOML run description; defaults apply to omitted keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Comma-separated seeds, overriding the config.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Total training frames, overriding the config.
    #[arg(long)]
    frames: Option<u64>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    algorithm: Option<String>,
}

impl Common {
    fn spec(&self, mode: Mode) -> Result<RunSpec> {
        let mut spec = match &self.config {
            Some(path) => parse_config(path).with_context(|| format!("reading {}", path.display()))?,
            None => RunSpec::default(),
        };
        spec.mode = mode;
        if let Some(s) = &self.seeds {
            spec.seeds = s.clone();
        }
        if let Some(o) = &self.output {
            spec.output_dir = o.clone();
        }
        if let Some(f) = self.frames {
            spec.agac.total_frames = f;
        }
        if let Some(s) = &self.scenario {
            spec.scenario = s.clone();
        }
        if let Some(a) = &self.algorithm {
            spec.algorithm = a.clone();
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn report(r: &RunReport) -> Result<()> {
    for s in r.summaries() {
        println!(
            "seed {}: rolling-100 return {:.3}, coverage {:.1}, goal fraction {:.3}, episodes {}",
            s.seed, s.final_return_rolling100, s.final_coverage_window10, s.goal_fraction, s.episodes
        );
    }
    if let Some(b) = &r.baseline {
        println!(
            "random baseline: goal fraction {:.3}, coverage {:.1} over {} episodes",
            b.goal_fraction, b.coverage_window10, b.episodes
        );
    }
    for (seed, err) in &r.failures {
        eprintln!("seed {seed} failed: {err}");
    }
    if !r.success() {
        bail!("{} seed(s) failed", r.failures.len());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(c) => report(&run_train(&c.spec(Mode::Train)?)?),
        Command::RewardFree(c) => report(&run_reward_free(&c.spec(Mode::EvalRewardFree)?)?),
        Command::Heatmap { common, checkpoint } => {
            let spec = common.spec(Mode::Heatmap)?;
            let dir = checkpoint
                .or_else(|| spec.checkpoint.clone())
                .context("heatmap needs --checkpoint or `checkpoint` in the config")?;
            let r = heatmap_from_checkpoint(&spec, &dir)?;
            println!(
                "{} episodes, {} steps, rooms per episode {:?}",
                r.episodes, r.total_steps, r.rooms_per_episode
            );
            Ok(())
        }
        Command::TabularPi(c) => {
            let rows = run_tabular(&c.spec(Mode::TabularPi)?)?;
            if let Some(last) = rows.last() {
                println!(
                    "iteration {}: objective {:.6}, KL to previous {:.3e}, greedy return {:.4}",
                    last.iteration, last.objective, last.kl_to_previous, last.greedy_return
                );
            }
            Ok(())
        }
        Command::Sweep(c) => {
            for r in run_sweep(&c.spec(Mode::Train)?)? {
                println!(
                    "c0 {:.1e} nu {:.1}: return {:.3} ± {:.3}, coverage {:.1}",
                    r.c0, r.lr_ratio, r.final_return_mean, r.final_return_std, r.final_coverage_mean
                );
            }
            Ok(())
        }
        Command::Defaults => {
            print!("{}", RunSpec::default().to_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
