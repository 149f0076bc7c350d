//! Breadth-first solver used to certify generated layouts.
//!
//! It searches an abstract state (pose, carried key, opened doors, taken
//! keys) with its own transition rules, independent of `GridState::step`.
//! Closing doors and dropping keys never shorten a solution and are not
//! explored.

use std::collections::{HashMap, VecDeque};

use super::{Action, Cell, DoorState, GridState, Heading, Pos};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    pos: Pos,
    heading: Heading,
    carrying: Option<u8>,
    open: u64,
    taken: u64,
}

struct Layout<'a> {
    state: &'a GridState,
    doors: HashMap<Pos, usize>,
    keys: HashMap<Pos, usize>,
    key_colors: Vec<super::Color>,
}

impl Layout<'_> {
    fn cell(&self, n: &Node, p: Pos) -> Cell {
        let base = self.state.cell(p);
        if let Some(&d) = self.doors.get(&p) {
            if n.open & (1 << d) != 0 {
                if let Cell::Door { color, .. } = base {
                    return Cell::Door {
                        color,
                        state: DoorState::Open,
                    };
                }
            }
        }
        if let Some(&k) = self.keys.get(&p) {
            if n.taken & (1 << k) != 0 {
                return Cell::Floor;
            }
        }
        base
    }

    fn next(&self, n: &Node, a: Action) -> Option<(Node, bool)> {
        let ahead = n.pos.step(n.heading);
        let cell = self.cell(n, ahead);
        let mut m = *n;
        match a {
            Action::TurnLeft => m.heading = n.heading.left(),
            Action::TurnRight => m.heading = n.heading.right(),
            Action::Forward => match cell {
                Cell::Floor
                | Cell::Door {
                    state: DoorState::Open, ..
                } => m.pos = ahead,
                Cell::Goal => return Some((m, true)),
                _ => return None,
            },
            Action::Pickup => match (cell, n.carrying) {
                (Cell::Key(_), None) => {
                    let k = self.keys[&ahead];
                    m.carrying = Some(k as u8);
                    m.taken |= 1 << k;
                }
                _ => return None,
            },
            Action::Toggle => match cell {
                Cell::Door {
                    state: DoorState::Closed,
                    ..
                } => m.open |= 1 << self.doors[&ahead],
                Cell::Door {
                    color,
                    state: DoorState::Locked,
                } => {
                    let holds = n.carrying.map(|k| self.key_colors[k as usize]) == Some(color);
                    if !holds {
                        return None;
                    }
                    m.open |= 1 << self.doors[&ahead];
                }
                _ => return None,
            },
            Action::Drop | Action::Done => return None,
        }
        Some((m, false))
    }
}

/// Shortest action sequence reaching the goal within the remaining step budget.
pub fn solve(state: &GridState) -> Option<Vec<Action>> {
    let mut doors = HashMap::new();
    let mut keys = HashMap::new();
    let mut key_colors = Vec::new();
    for p in state.positions() {
        match state.cell(p) {
            Cell::Door { .. } => {
                let i = doors.len();
                doors.insert(p, i);
            }
            Cell::Key(c) => {
                keys.insert(p, key_colors.len());
                key_colors.push(c);
            }
            _ => {}
        }
    }
    if doors.len() > 64 || keys.len() > 64 {
        return None;
    }
    let layout = Layout {
        state,
        doors,
        keys,
        key_colors,
    };
    let budget = state.max_steps().saturating_sub(state.steps()) as usize;
    let start = Node {
        pos: state.agent(),
        heading: state.heading(),
        carrying: None,
        open: 0,
        taken: 0,
    };
    // a key already in hand counts as an extra, untaken key
    let (layout, start) = match state.carrying() {
        Some(c) => {
            let mut l = layout;
            l.key_colors.push(c);
            let idx = l.key_colors.len() - 1;
            (
                l,
                Node {
                    carrying: Some(idx as u8),
                    ..start
                },
            )
        }
        None => (layout, start),
    };
    let mut parent: HashMap<Node, (Node, Action)> = HashMap::new();
    let mut depth: HashMap<Node, usize> = HashMap::new();
    depth.insert(start, 0);
    let mut queue = VecDeque::from([start]);
    let actions = [
        Action::TurnLeft,
        Action::TurnRight,
        Action::Forward,
        Action::Pickup,
        Action::Toggle,
    ];
    while let Some(n) = queue.pop_front() {
        let d = depth[&n];
        if d >= budget {
            continue;
        }
        for a in actions {
            let Some((m, goal)) = layout.next(&n, a) else {
                continue;
            };
            if goal {
                let mut plan = vec![a];
                let mut cur = n;
                while let Some(&(prev, act)) = parent.get(&cur) {
                    plan.push(act);
                    cur = prev;
                }
                plan.reverse();
                return Some(plan);
            }
            if let std::collections::hash_map::Entry::Vacant(e) = depth.entry(m) {
                e.insert(d + 1);
                parent.insert(m, (n, a));
                queue.push_back(m);
            }
        }
    }
    None
}

/// Cells the agent can reach on foot, opening closed doors freely. Locked
/// doors are passable only when `unlock` is set.
pub fn reachable_cells(state: &GridState, unlock: bool) -> Vec<Pos> {
    let mut seen = vec![false; (state.height() * state.width()) as usize];
    let idx = |p: Pos| (p.row * state.width() + p.col) as usize;
    let mut out = Vec::new();
    let mut queue = VecDeque::from([state.agent()]);
    seen[idx(state.agent())] = true;
    while let Some(p) = queue.pop_front() {
        out.push(p);
        for h in Heading::ALL {
            let q = p.step(h);
            if !state.in_bounds(q) || seen[idx(q)] {
                continue;
            }
            let passable = match state.cell(q) {
                Cell::Floor
                | Cell::Goal
                | Cell::Door {
                    state: DoorState::Open | DoorState::Closed,
                    ..
                } => true,
                Cell::Door {
                    state: DoorState::Locked,
                    ..
                } => unlock,
                Cell::Key(_) => true,
                Cell::Wall => false,
            };
            if passable {
                seen[idx(q)] = true;
                queue.push_back(q);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{generate, Scenario};

    fn replay(state: &GridState, plan: &[Action]) -> (f64, bool) {
        let mut g = state.clone();
        let mut total = 0.0;
        for (i, a) in plan.iter().enumerate() {
            let out = g.step_in_place(a.index()).unwrap();
            total += out.reward;
            if out.done {
                return (total, i + 1 == plan.len());
            }
        }
        (total, false)
    }

    #[test]
    fn plans_replay_to_the_goal() {
        for desc in ["MultiRoom-N2-S4", "MultiRoom-N4-S5", "KeyCorridor-S3-R3"] {
            let s: Scenario = desc.parse().unwrap();
            for seed in 0..40 {
                let g = generate(&s, seed).unwrap();
                let plan = solve(&g).expect("solvable");
                assert!(plan.len() <= g.max_steps() as usize);
                assert_eq!(replay(&g, &plan), (1.0, true), "{desc} seed {seed}");
            }
        }
    }

    #[test]
    fn key_reachable_goal_locked_away() {
        let s: Scenario = "KeyCorridor-S3-R3".parse().unwrap();
        for seed in 0..40 {
            let g = generate(&s, seed).unwrap();
            let without = reachable_cells(&g, false);
            assert!(without.iter().any(|p| matches!(g.cell(*p), Cell::Key(_))));
            assert!(!without.iter().any(|p| g.cell(*p) == Cell::Goal));
            let with = reachable_cells(&g, true);
            assert!(with.iter().any(|p| g.cell(*p) == Cell::Goal));
        }
    }

    #[test]
    fn sealed_goal_is_unsolvable() {
        let s: Scenario = "MultiRoom-N2-S4".parse().unwrap();
        let mut g = generate(&s, 3).unwrap();
        for p in g.positions().collect::<Vec<_>>() {
            if matches!(g.cell(p), Cell::Door { .. }) {
                g.set_cell(p, Cell::Wall);
            }
        }
        assert!(solve(&g).is_none());
    }
}
