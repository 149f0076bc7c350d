//! Egocentric 7×7 partial views and frame stacking.
//!
//! Each view cell is stored as three bytes `(type, color + 1, state + 1)`;
//! zero means "absent" for color and state. Types: 0 unseen, 1 empty,
//! 2 wall, 3 door, 4 key, 5 goal. The one-hot network encoding gives every
//! cell 15 channels: 6 type, 6 color and 3 door-state slots.
//!
//! The view is rotated so the agent faces "up": the agent sits at row 6,
//! column 3, and row 0 is the farthest row ahead.

use std::collections::VecDeque;

use super::{Cell, DoorState, GridState, Pos};

pub const VIEW_SIZE: usize = 7;
pub const CELL_CHANNELS: usize = 15;
pub const FRAME_STACK: usize = 4;
pub const FRAME_DIM: usize = VIEW_SIZE * VIEW_SIZE * CELL_CHANNELS;
pub const OBS_INPUT_DIM: usize = FRAME_DIM * FRAME_STACK;

const AGENT_ROW: usize = VIEW_SIZE - 1;
const AGENT_COL: usize = VIEW_SIZE / 2;

const T_UNSEEN: u8 = 0;
const T_EMPTY: u8 = 1;
const T_WALL: u8 = 2;
const T_DOOR: u8 = 3;
const T_KEY: u8 = 4;
const T_GOAL: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Observation {
    codes: [u8; VIEW_SIZE * VIEW_SIZE * 3],
}

impl Observation {
    pub fn bytes(&self) -> &[u8] {
        &self.codes
    }

    /// `(type, color + 1, state + 1)` of the view cell at (row, col).
    pub fn code(&self, row: usize, col: usize) -> (u8, u8, u8) {
        let k = 3 * (row * VIEW_SIZE + col);
        (self.codes[k], self.codes[k + 1], self.codes[k + 2])
    }

    pub fn is_visible(&self, row: usize, col: usize) -> bool {
        self.code(row, col).0 != T_UNSEEN
    }

    pub fn has_goal(&self) -> bool {
        self.codes.chunks(3).any(|c| c[0] == T_GOAL)
    }

    /// Active one-hot indices of this frame, shifted by `offset`.
    pub fn push_active(&self, offset: u32, out: &mut Vec<u32>) {
        for (k, c) in self.codes.chunks_exact(3).enumerate() {
            let base = offset + (k * CELL_CHANNELS) as u32;
            out.push(base + c[0] as u32);
            if c[1] > 0 {
                out.push(base + 6 + (c[1] - 1) as u32);
            }
            if c[2] > 0 {
                out.push(base + 12 + (c[2] - 1) as u32);
            }
        }
    }

    pub fn to_one_hot(&self) -> Vec<f64> {
        let mut idx = Vec::new();
        self.push_active(0, &mut idx);
        let mut v = vec![0.0; FRAME_DIM];
        for i in idx {
            v[i as usize] = 1.0;
        }
        v
    }
}

fn encode(cell: Cell, reward_free: bool) -> [u8; 3] {
    match cell {
        Cell::Wall => [T_WALL, 0, 0],
        Cell::Floor => [T_EMPTY, 0, 0],
        Cell::Goal if reward_free => [T_EMPTY, 0, 0],
        Cell::Goal => [T_GOAL, 2, 0],
        Cell::Key(c) => [T_KEY, c.index() as u8 + 1, 0],
        Cell::Door { color, state } => {
            let s = match state {
                DoorState::Open => 1,
                DoorState::Closed => 2,
                DoorState::Locked => 3,
            };
            [T_DOOR, color.index() as u8 + 1, s]
        }
    }
}

/// World position shown at view cell (row, col).
pub fn view_to_world(state: &GridState, row: usize, col: usize) -> Pos {
    let fwd = state.heading().delta();
    let right = state.heading().right().delta();
    let f = (AGENT_ROW - row) as i32;
    let l = col as i32 - AGENT_COL as i32;
    let a = state.agent();
    Pos::new(a.row + f * fwd.0 + l * right.0, a.col + f * fwd.1 + l * right.1)
}

pub fn observe(state: &GridState) -> Observation {
    let mut view = [[Cell::Wall; VIEW_SIZE]; VIEW_SIZE];
    for (r, row) in view.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = state.cell(view_to_world(state, r, c));
        }
    }
    view[AGENT_ROW][AGENT_COL] = match state.carrying() {
        Some(color) => Cell::Key(color),
        None => Cell::Floor,
    };

    // Row-by-row shadowing from the agent outwards; opaque cells are seen
    // but propagate nothing.
    let mut mask = [[false; VIEW_SIZE]; VIEW_SIZE];
    mask[AGENT_ROW][AGENT_COL] = true;
    for r in (0..VIEW_SIZE).rev() {
        for c in 0..VIEW_SIZE - 1 {
            if !mask[r][c] || !view[r][c].transparent() {
                continue;
            }
            mask[r][c + 1] = true;
            if r > 0 {
                mask[r - 1][c + 1] = true;
                mask[r - 1][c] = true;
            }
        }
        for c in (1..VIEW_SIZE).rev() {
            if !mask[r][c] || !view[r][c].transparent() {
                continue;
            }
            mask[r][c - 1] = true;
            if r > 0 {
                mask[r - 1][c - 1] = true;
                mask[r - 1][c] = true;
            }
        }
    }

    let reward_free = state.scenario().reward_free();
    let mut codes = [0u8; VIEW_SIZE * VIEW_SIZE * 3];
    for r in 0..VIEW_SIZE {
        for c in 0..VIEW_SIZE {
            if mask[r][c] {
                let k = 3 * (r * VIEW_SIZE + c);
                codes[k..k + 3].copy_from_slice(&encode(view[r][c], reward_free));
            }
        }
    }
    Observation { codes }
}

/// The last four frames, oldest first; missing frames are all-zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StackedObservation {
    frames: VecDeque<Option<Observation>>,
}

impl StackedObservation {
    pub fn new() -> Self {
        Self {
            frames: std::iter::repeat_n(None, FRAME_STACK).collect(),
        }
    }

    pub fn reset(&mut self, first: Observation) {
        self.frames.clear();
        self.frames.extend(std::iter::repeat_n(None, FRAME_STACK - 1));
        self.frames.push_back(Some(first));
    }

    pub fn push(&mut self, obs: Observation) {
        if self.frames.len() == FRAME_STACK {
            self.frames.pop_front();
        }
        self.frames.push_back(Some(obs));
    }

    pub fn latest(&self) -> Option<&Observation> {
        self.frames.back().and_then(|f| f.as_ref())
    }

    pub fn frames(&self) -> impl Iterator<Item = Option<&Observation>> {
        self.frames.iter().map(|f| f.as_ref())
    }

    pub fn active_indices(&self, out: &mut Vec<u32>) {
        out.clear();
        let pad = FRAME_STACK - self.frames.len();
        for (k, f) in self.frames.iter().enumerate() {
            if let Some(obs) = f {
                obs.push_active(((k + pad) * FRAME_DIM) as u32, out);
            }
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut idx = Vec::new();
        self.active_indices(&mut idx);
        let mut v = vec![0.0; OBS_INPUT_DIM];
        for i in idx {
            v[i as usize] = 1.0;
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{generate, GridState, Heading, Scenario};

    fn room(h: i32, w: i32) -> GridState {
        let scenario: Scenario = "MultiRoom-N2-S4".parse().unwrap();
        let mut g = GridState::blank(h, w, scenario, 0);
        for r in 1..h - 1 {
            for c in 1..w - 1 {
                g.set_cell(Pos::new(r, c), Cell::Floor);
            }
        }
        g
    }

    #[test]
    fn wall_ahead_hides_everything_beyond() {
        let mut g = room(9, 9);
        g.place_agent(Pos::new(1, 4), Heading::North);
        let o = observe(&g);
        // row 5 of the view is the wall row; rows 0..5 lie beyond it
        for c in 0..VIEW_SIZE {
            assert_eq!(o.code(5, c).0, T_WALL, "col {c}");
            for r in 0..5 {
                assert!(!o.is_visible(r, c), "({r},{c}) visible");
            }
        }
        assert_eq!(o.code(AGENT_ROW, AGENT_COL), (T_EMPTY, 0, 0));
    }

    #[test]
    fn translation_invariant() {
        let mut a = room(8, 8);
        a.set_cell(Pos::new(2, 3), Cell::Goal);
        a.place_agent(Pos::new(5, 4), Heading::West);
        let mut b = GridState::blank(14, 13, a.scenario().clone(), 0);
        for p in a.positions() {
            b.set_cell(Pos::new(p.row + 4, p.col + 3), a.cell(p));
        }
        b.place_agent(Pos::new(9, 7), Heading::West);
        assert_eq!(observe(&a), observe(&b));
    }

    #[test]
    fn four_turns_cycle() {
        let mut g = room(8, 9);
        g.set_cell(Pos::new(2, 2), Cell::Goal);
        g.set_cell(Pos::new(4, 6), Cell::Wall);
        g.place_agent(Pos::new(3, 3), Heading::North);
        let mut seen = Vec::new();
        for _ in 0..4 {
            seen.push(observe(&g));
            g.step_in_place(1).unwrap();
        }
        for i in 0..4 {
            for j in i + 1..4 {
                assert_ne!(seen[i], seen[j]);
            }
        }
        assert_eq!(observe(&g), seen[0]);
    }

    #[test]
    fn reward_free_hides_goal() {
        let s: Scenario = "MultiRoom-N2-S4".parse().unwrap();
        let rf = s.with_reward_free(true);
        for seed in 0..20 {
            let a = generate(&s, seed).unwrap();
            let b = generate(&rf, seed).unwrap();
            assert_eq!(a.cells(), b.cells());
            assert_eq!(a.agent(), b.agent());
        }
        let mut g = room(6, 6);
        g.set_cell(Pos::new(2, 3), Cell::Goal);
        g.place_agent(Pos::new(3, 3), Heading::North);
        assert!(observe(&g).has_goal());
        g.scenario = g.scenario.with_reward_free(true);
        assert!(!observe(&g).has_goal());
    }

    #[test]
    fn stack_rolls_and_zero_fills() {
        let s: Scenario = "MultiRoom-N2-S4".parse().unwrap();
        let mut g = generate(&s, 1).unwrap();
        let mut stack = StackedObservation::new();
        let first = observe(&g);
        stack.reset(first);
        let mut idx = Vec::new();
        stack.active_indices(&mut idx);
        assert!(idx.iter().all(|&i| i as usize >= 3 * FRAME_DIM));
        for _ in 0..5 {
            g.step_in_place(0).unwrap();
            stack.push(observe(&g));
        }
        assert_eq!(stack.frames().count(), FRAME_STACK);
        assert!(stack.frames().all(|f| f.is_some()));
        assert_eq!(stack.to_dense().len(), OBS_INPUT_DIM);
        // each visible cell has exactly one type bit set
        let dense = first.to_one_hot();
        for k in 0..VIEW_SIZE * VIEW_SIZE {
            let types: f64 = dense[k * CELL_CHANNELS..k * CELL_CHANNELS + 6].iter().sum();
            assert_eq!(types, 1.0);
        }
    }
}
