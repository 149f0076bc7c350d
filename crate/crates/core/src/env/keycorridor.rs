use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Cell, Color, DoorState, GridState, Heading, LayoutGenerator, Pos, Room, Scenario};

/// Three columns of `rows` rooms of side `room_side`. The middle column is an
/// open corridor; the goal sits in a right-hand room behind a locked door and
/// the matching key lies in a left-hand room. Single key/door pair only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyCorridor {
    pub room_side: u32,
    pub rows: u32,
}

pub const KEY_CORRIDOR_MAX_STEPS: u32 = 270;

impl KeyCorridor {
    pub fn new(room_side: u32, rows: u32) -> Result<Self, String> {
        if room_side < 3 {
            return Err(format!("KeyCorridor room side must be at least 3, got {room_side}"));
        }
        if rows < 1 {
            return Err("KeyCorridor needs at least one row".into());
        }
        if room_side > 10 || rows > 8 {
            return Err("KeyCorridor is limited to side 10 and 8 rows".into());
        }
        Ok(Self { room_side, rows })
    }

    pub fn from_params(params: &[(char, u32)]) -> Result<Arc<dyn LayoutGenerator>, String> {
        let mut s = None;
        let mut r = None;
        for &(k, v) in params {
            match k {
                'S' => s = Some(v),
                'R' => r = Some(v),
                _ => return Err(format!("unknown KeyCorridor parameter {k}")),
            }
        }
        let (Some(s), Some(r)) = (s, r) else {
            return Err("KeyCorridor needs S<side> and R<rows>".into());
        };
        Ok(Arc::new(Self::new(s, r)?))
    }

    fn room(&self, col: i32, row: i32) -> Room {
        let step = self.room_side as i32 - 1;
        Room {
            top: Pos::new(row * step, col * step),
            height: step + 1,
            width: step + 1,
        }
    }
}

fn interior_cell(rng: &mut ChaCha8Rng, room: &Room) -> Pos {
    Pos::new(
        room.top.row + rng.gen_range(1..room.height - 1),
        room.top.col + rng.gen_range(1..room.width - 1),
    )
}

/// Door cell on the vertical wall at `col`, inside `room`'s row span.
fn side_door(rng: &mut ChaCha8Rng, room: &Room, col: i32) -> Pos {
    Pos::new(room.top.row + rng.gen_range(1..room.height - 1), col)
}

impl LayoutGenerator for KeyCorridor {
    fn descriptor(&self) -> String {
        format!("KeyCorridor-S{}-R{}", self.room_side, self.rows)
    }

    fn max_steps(&self) -> u32 {
        KEY_CORRIDOR_MAX_STEPS
    }

    fn try_layout(&self, rng: &mut ChaCha8Rng, scenario: &Scenario, seed: u64) -> Option<GridState> {
        let step = self.room_side as i32 - 1;
        let rows = self.rows as i32;
        let mut g = GridState::blank(rows * step + 1, 3 * step + 1, scenario.clone(), seed);
        for col in 0..3 {
            for row in 0..rows {
                let room = self.room(col, row);
                for r in 1..room.height - 1 {
                    for c in 1..room.width - 1 {
                        g.set_cell(Pos::new(room.top.row + r, room.top.col + c), Cell::Floor);
                    }
                }
                g.rooms.push(room);
            }
        }
        // open the walls between stacked corridor rooms
        for row in 1..rows {
            for c in step + 1..2 * step {
                g.set_cell(Pos::new(row * step, c), Cell::Floor);
            }
        }
        let locked_color = Color::ALL[rng.gen_range(0..Color::ALL.len())];
        let others: Vec<Color> = Color::ALL.into_iter().filter(|c| *c != locked_color).collect();
        let goal_row = rng.gen_range(0..rows);
        let key_row = rng.gen_range(0..rows);
        for row in 0..rows {
            let left = self.room(0, row);
            let door = side_door(rng, &left, step);
            let color = others[rng.gen_range(0..others.len())];
            g.set_cell(
                door,
                Cell::Door {
                    color,
                    state: DoorState::Closed,
                },
            );

            let right = self.room(2, row);
            let door = side_door(rng, &right, 2 * step);
            if row == goal_row {
                g.set_cell(
                    door,
                    Cell::Door {
                        color: locked_color,
                        state: DoorState::Locked,
                    },
                );
            } else {
                let color = others[rng.gen_range(0..others.len())];
                g.set_cell(
                    door,
                    Cell::Door {
                        color,
                        state: DoorState::Closed,
                    },
                );
            }
        }
        let goal = interior_cell(rng, &self.room(2, goal_row));
        g.set_cell(goal, Cell::Goal);
        let key = interior_cell(rng, &self.room(0, key_row));
        g.set_cell(key, Cell::Key(locked_color));
        let start = interior_cell(rng, &self.room(1, rows / 2));
        let heading = Heading::ALL[rng.gen_range(0..4)];
        g.place_agent(start, heading);
        Some(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{generate, render_ascii};

    #[test]
    fn single_lock_and_matching_key() {
        let s: Scenario = "KeyCorridor-S3-R3".parse().unwrap();
        for seed in 0..30 {
            let g = generate(&s, seed).unwrap();
            assert_eq!((g.height(), g.width()), (7, 7), "{}", render_ascii(&g));
            let locked: Vec<Color> = g
                .cells()
                .iter()
                .filter_map(|c| match c {
                    Cell::Door {
                        color,
                        state: DoorState::Locked,
                    } => Some(*color),
                    _ => None,
                })
                .collect();
            let keys: Vec<Color> = g
                .cells()
                .iter()
                .filter_map(|c| match c {
                    Cell::Key(color) => Some(*color),
                    _ => None,
                })
                .collect();
            assert_eq!(locked.len(), 1);
            assert_eq!(keys, locked);
            assert_eq!(g.rooms().len(), 9);
        }
    }

    #[test]
    fn larger_rooms_generate() {
        let s: Scenario = "KeyCorridor-S4-R3".parse().unwrap();
        let g = generate(&s, 4).unwrap();
        assert_eq!((g.height(), g.width()), (10, 10));
    }
}
