//! Experiment orchestration: configuration, seeded runs, reward-free
//! evaluation, heatmaps, sweeps and the tabular mode.

mod config;
mod heatmap;
mod metrics;
mod run;

pub use config::{parse_config, parse_config_str, Mode, RunSpec, TabularSpec};
pub use heatmap::{emit_heatmap, rooms_visited, HeatmapGrid, HeatmapReport};
pub use metrics::{
    mean_std, read_metrics, summarize, write_summary, EpisodeStats, MetricsRow, MetricsWriter, SummaryRow,
    COVERAGE_WINDOW, RETURN_WINDOW,
};
pub use run::{
    heatmap_from_checkpoint, random_baseline, run_reward_free, run_sweep, run_tabular, run_train, BaselineReport,
    RunReport, SeedOutcome, SeedSummary, SweepRow, FINAL_WINDOWS,
};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::agac::AgacError;
use crate::nn::NnError;
use crate::tabular::TabularError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config{}: {message}", line.map(|l| format!(" line {l}")).unwrap_or_default())]
    Config {
        line: Option<usize>,
        key: Option<String>,
        message: String,
    },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("output: {0}")]
    Output(String),
    #[error(transparent)]
    Agac(#[from] AgacError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Tabular(#[from] TabularError),
}

impl HarnessError {
    pub(crate) fn config(line: Option<usize>, message: impl Into<String>) -> Self {
        Self::Config {
            line,
            key: None,
            message: message.into(),
        }
    }

    pub(crate) fn keyed(key: &str, message: &str) -> Self {
        Self::Config {
            line: None,
            key: Some(key.to_string()),
            message: format!("{key}: {message}"),
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
