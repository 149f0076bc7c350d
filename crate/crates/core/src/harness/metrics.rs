use std::collections::VecDeque;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agac::UpdateMetrics;
use crate::rollout::EpisodeRecord;

/// Episodes in the rolling return average.
pub const RETURN_WINDOW: usize = 100;
/// Episodes per coverage window.
pub const COVERAGE_WINDOW: usize = 10;

/// One row per update. Column order of the CSV follows the field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub update: u64,
    pub frames: u64,
    pub c: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub adversary_loss: f64,
    pub entropy: f64,
    pub kl_mean: f64,
    pub bonus_mean: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
    pub skipped: usize,
    pub episodes: u64,
    /// Mean return of the last 100 finished episodes (0 before any finish).
    pub return_rolling100: f64,
    /// Fraction of all finished episodes that reached the goal.
    pub goal_fraction: f64,
    /// Distinct observations in the most recent complete 10-episode window.
    pub coverage_window10: f64,
}

/// Running episode statistics of one seed.
#[derive(Debug, Clone, Default)]
pub struct EpisodeStats {
    returns: VecDeque<f64>,
    pending: Vec<u64>,
    pub windows: Vec<usize>,
    pub episodes: u64,
    pub goals: u64,
}

impl EpisodeStats {
    pub fn record(&mut self, ep: &EpisodeRecord) {
        self.episodes += 1;
        self.goals += ep.reached_goal as u64;
        self.returns.push_back(ep.ret);
        if self.returns.len() > RETURN_WINDOW {
            self.returns.pop_front();
        }
        self.pending.extend(&ep.distinct_obs);
        if (self.episodes as usize).is_multiple_of(COVERAGE_WINDOW) {
            self.pending.sort_unstable();
            self.pending.dedup();
            self.windows.push(self.pending.len());
            self.pending.clear();
        }
    }

    pub fn rolling_return(&self) -> f64 {
        if self.returns.is_empty() {
            0.0
        } else {
            self.returns.iter().sum::<f64>() / self.returns.len() as f64
        }
    }

    pub fn goal_fraction(&self) -> f64 {
        if self.episodes == 0 {
            0.0
        } else {
            self.goals as f64 / self.episodes as f64
        }
    }

    pub fn last_coverage(&self) -> f64 {
        self.windows.last().map_or(0.0, |&w| w as f64)
    }

    /// Mean of the last `n` complete coverage windows.
    pub fn final_coverage(&self, n: usize) -> f64 {
        let tail = &self.windows[self.windows.len().saturating_sub(n)..];
        if tail.is_empty() {
            0.0
        } else {
            tail.iter().sum::<usize>() as f64 / tail.len() as f64
        }
    }

    pub fn row(&self, m: &UpdateMetrics) -> MetricsRow {
        MetricsRow {
            update: m.update,
            frames: m.frames,
            c: m.c,
            policy_loss: m.policy_loss,
            value_loss: m.value_loss,
            adversary_loss: m.adversary_loss,
            entropy: m.entropy,
            kl_mean: m.kl_mean,
            bonus_mean: m.bonus_mean,
            clip_fraction: m.clip_fraction,
            approx_kl: m.approx_kl,
            skipped: m.skipped,
            episodes: self.episodes,
            return_rolling100: self.rolling_return(),
            goal_fraction: self.goal_fraction(),
            coverage_window10: self.last_coverage(),
        }
    }
}

/// Appends rows to `metrics.csv` and mirrors them to `metrics.jsonl`.
pub struct MetricsWriter {
    csv: csv::Writer<BufWriter<File>>,
    jsonl: BufWriter<File>,
    path: PathBuf,
}

impl MetricsWriter {
    pub fn create(dir: &Path) -> Result<Self, HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let path = dir.join("metrics.csv");
        let csv_file = File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
        let jpath = dir.join("metrics.jsonl");
        let jfile = File::create(&jpath).map_err(|e| HarnessError::io(&jpath, e))?;
        Ok(Self {
            csv: csv::Writer::from_writer(BufWriter::new(csv_file)),
            jsonl: BufWriter::new(jfile),
            path,
        })
    }

    pub fn append(&mut self, row: &MetricsRow) -> Result<(), HarnessError> {
        self.csv
            .serialize(row)
            .map_err(|e| HarnessError::Output(format!("{}: {e}", self.path.display())))?;
        serde_json::to_writer(&mut self.jsonl, row).map_err(|e| HarnessError::Output(e.to_string()))?;
        self.jsonl
            .write_all(b"\n")
            .map_err(|e| HarnessError::io(&self.path, e))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), HarnessError> {
        self.csv.flush().map_err(|e| HarnessError::io(&self.path, e))?;
        self.jsonl.flush().map_err(|e| HarnessError::io(&self.path, e))?;
        Ok(())
    }
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| HarnessError::Output(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .collect::<Result<Vec<MetricsRow>, _>>()
        .map_err(|e| HarnessError::Output(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub update: u64,
    pub frames: u64,
    pub seeds: usize,
    pub return_rolling100_mean: f64,
    pub return_rolling100_std: f64,
    pub coverage_window10_mean: f64,
    pub coverage_window10_std: f64,
    pub goal_fraction_mean: f64,
    pub goal_fraction_std: f64,
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Cross-seed statistics per update index present in every run.
pub fn summarize(runs: &[Vec<MetricsRow>]) -> Vec<SummaryRow> {
    let len = runs.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let col = |f: fn(&MetricsRow) -> f64| runs.iter().map(|r| f(&r[i])).collect::<Vec<f64>>();
            let (rm, rs) = mean_std(&col(|r| r.return_rolling100));
            let (cm, cs) = mean_std(&col(|r| r.coverage_window10));
            let (gm, gs) = mean_std(&col(|r| r.goal_fraction));
            SummaryRow {
                update: runs[0][i].update,
                frames: runs[0][i].frames,
                seeds: runs.len(),
                return_rolling100_mean: rm,
                return_rolling100_std: rs,
                coverage_window10_mean: cm,
                coverage_window10_std: cs,
                goal_fraction_mean: gm,
                goal_fraction_std: gs,
            }
        })
        .collect()
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::Output(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r).map_err(|e| HarnessError::Output(e.to_string()))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}
