use std::collections::BTreeSet;
use std::path::Path;

use super::HarnessError;
use crate::rollout::EpisodeRecord;

/// Visit counts over world coordinates, row-major `counts[row * width + col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid {
    pub height: usize,
    pub width: usize,
    pub counts: Vec<u64>,
    pub scenario: String,
    pub seed: u64,
    /// Human-readable description of the episodes covered.
    pub window: String,
}

impl HeatmapGrid {
    pub fn empty(height: usize, width: usize, scenario: &str, seed: u64, window: String) -> Self {
        Self {
            height,
            width,
            counts: vec![0; height * width],
            scenario: scenario.to_string(),
            seed,
            window,
        }
    }

    pub fn from_episode(ep: &EpisodeRecord, scenario: &str, seed: u64, window: String) -> Self {
        let mut g = Self::empty(ep.grid_height as usize, ep.grid_width as usize, scenario, seed, window);
        g.add(ep).expect("dimensions come from the episode");
        g
    }

    pub fn add(&mut self, ep: &EpisodeRecord) -> Result<(), HarnessError> {
        if ep.grid_height as usize != self.height || ep.grid_width as usize != self.width {
            return Err(HarnessError::config(
                None,
                format!(
                    "episode grid {}x{} does not match heatmap {}x{}",
                    ep.grid_height, ep.grid_width, self.height, self.width
                ),
            ));
        }
        for p in &ep.positions {
            self.counts[p.row as usize * self.width + p.col as usize] += 1;
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn nonzero_cells(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Header lines starting with `#`, then one row of integers per grid row.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# scenario {}\n# seed {}\n# window {}\n# size {}x{}\n",
            self.scenario, self.seed, self.window, self.height, self.width
        );
        for row in self.counts.chunks(self.width) {
            let line: Vec<String> = row.iter().map(u64::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// ASCII graymap; darker pixels mean more visits.
    pub fn to_pgm(&self) -> String {
        let max = self.counts.iter().copied().max().unwrap_or(0).max(1);
        let mut out = format!(
            "P2\n# {} seed {} {}\n{} {}\n255\n",
            self.scenario, self.seed, self.window, self.width, self.height
        );
        for row in self.counts.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|&c| (255 - (c * 255 / max)).to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &Path, stem: &str) -> Result<(), HarnessError> {
        let txt = dir.join(format!("{stem}.txt"));
        std::fs::write(&txt, self.to_text()).map_err(|e| HarnessError::io(&txt, e))?;
        let pgm = dir.join(format!("{stem}.pgm"));
        std::fs::write(&pgm, self.to_pgm()).map_err(|e| HarnessError::io(&pgm, e))?;
        Ok(())
    }
}

/// Rooms whose interior the episode entered, by index into its room records.
pub fn rooms_visited(ep: &EpisodeRecord) -> BTreeSet<usize> {
    ep.positions
        .iter()
        .filter_map(|&p| ep.rooms.iter().position(|r| r.interior_contains(p)))
        .collect()
}

/// Summary of an emitted heatmap window.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapReport {
    pub episodes: usize,
    pub total_steps: u64,
    pub aggregate: HeatmapGrid,
    /// Distinct rooms entered, per episode.
    pub rooms_per_episode: Vec<usize>,
}

/// Writes `episode-XX.{txt,pgm}` for each of the last `k` episodes and
/// `aggregate.{txt,pgm}` for their sum.
pub fn emit_heatmap(
    episodes: &[EpisodeRecord],
    k: usize,
    scenario: &str,
    seed: u64,
    dir: &Path,
) -> Result<HeatmapReport, HarnessError> {
    if k == 0 {
        return Err(HarnessError::config(
            None,
            "heatmap window must cover at least one episode",
        ));
    }
    let window = &episodes[episodes.len().saturating_sub(k)..];
    let first = window
        .first()
        .ok_or_else(|| HarnessError::config(None, "no finished episodes to draw"))?;
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let label = format!("last {} episodes", window.len());
    let mut aggregate = HeatmapGrid::empty(
        first.grid_height as usize,
        first.grid_width as usize,
        scenario,
        seed,
        label,
    );
    let mut rooms_per_episode = Vec::with_capacity(window.len());
    for (i, ep) in window.iter().enumerate() {
        let grid = HeatmapGrid::from_episode(ep, scenario, seed, format!("episode {} of {}", i + 1, window.len()));
        grid.write(dir, &format!("episode-{:02}", i + 1))?;
        aggregate.add(ep)?;
        rooms_per_episode.push(rooms_visited(ep).len());
    }
    aggregate.write(dir, "aggregate")?;
    Ok(HeatmapReport {
        episodes: window.len(),
        total_steps: aggregate.total(),
        aggregate,
        rooms_per_episode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Pos, Room};

    fn ep(positions: Vec<Pos>) -> EpisodeRecord {
        EpisodeRecord {
            env: 0,
            seed: 0,
            ret: 0.0,
            length: positions.len() as u32,
            reached_goal: false,
            positions,
            distinct_obs: vec![],
            grid_height: 6,
            grid_width: 9,
            rooms: vec![
                Room {
                    top: Pos::new(0, 0),
                    height: 6,
                    width: 5,
                },
                Room {
                    top: Pos::new(0, 4),
                    height: 6,
                    width: 5,
                },
            ],
        }
    }

    #[test]
    fn stationary_agent_fills_one_cell() {
        let e = ep(vec![Pos::new(2, 2); 17]);
        let g = HeatmapGrid::from_episode(&e, "x", 0, "w".into());
        assert_eq!(g.nonzero_cells(), 1);
        assert_eq!(g.counts[2 * 9 + 2], 17);
        assert_eq!(rooms_visited(&e).len(), 1);
    }

    #[test]
    fn window_files_and_conservation() {
        let dir = tempfile::tempdir().unwrap();
        let eps: Vec<EpisodeRecord> = (0..12)
            .map(|i| ep(vec![Pos::new(1, 1 + i % 7); 3 + i as usize]))
            .collect();
        let r = emit_heatmap(&eps, 10, "x", 4, dir.path()).unwrap();
        assert_eq!(r.episodes, 10);
        let expected: u64 = eps[2..].iter().map(|e| e.length as u64).sum();
        assert_eq!(r.total_steps, expected);
        let files = std::fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(files, 2 * 11);
        let text = std::fs::read_to_string(dir.path().join("aggregate.txt")).unwrap();
        let sum: u64 = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .flat_map(|l| l.split(' '))
            .map(|x| x.parse::<u64>().unwrap())
            .sum();
        assert_eq!(sum, expected);
        assert!(r.rooms_per_episode.iter().all(|&n| n <= 1));
    }
}
