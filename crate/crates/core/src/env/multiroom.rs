use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Cell, Color, DoorState, GridState, Heading, LayoutGenerator, Pos, Room, Scenario};

const GRID_SIDE: i32 = 25;
const MIN_ROOM_SIDE: i32 = 4;
const EXIT_TRIES: usize = 8;

/// Chain of `rooms` rooms (outer side 4..=`max_side`), joined by closed doors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiRoom {
    pub rooms: u32,
    pub max_side: u32,
}

impl MultiRoom {
    pub fn new(rooms: u32, max_side: u32) -> Result<Self, String> {
        if rooms < 2 {
            return Err(format!("MultiRoom needs at least 2 rooms, got {rooms}"));
        }
        if max_side < MIN_ROOM_SIDE as u32 {
            return Err(format!("MultiRoom room side must be at least 4, got {max_side}"));
        }
        if max_side > 12 || rooms > 12 {
            return Err("MultiRoom is limited to 12 rooms of side at most 12".into());
        }
        Ok(Self { rooms, max_side })
    }

    pub fn from_params(params: &[(char, u32)]) -> Result<Arc<dyn LayoutGenerator>, String> {
        let mut n = None;
        let mut s = None;
        for &(k, v) in params {
            match k {
                'N' => n = Some(v),
                'S' => s = Some(v),
                _ => return Err(format!("unknown MultiRoom parameter {k}")),
            }
        }
        let (Some(n), Some(s)) = (n, s) else {
            return Err("MultiRoom needs N<rooms> and S<side>".into());
        };
        Ok(Arc::new(Self::new(n, s)?))
    }

    /// Random walk of room rectangles; each room's entry door sits on the
    /// previous room's exit wall.
    fn place_rooms(&self, rng: &mut ChaCha8Rng) -> Option<Vec<(Room, Option<Pos>)>> {
        let mut rooms = Vec::new();
        let first = Pos::new(rng.gen_range(0..GRID_SIDE - 2), rng.gen_range(0..GRID_SIDE - 2));
        self.place_room(rng, &mut rooms, self.rooms as usize, Wall::Left, first);
        (rooms.len() == self.rooms as usize).then_some(rooms)
    }

    fn place_room(
        &self,
        rng: &mut ChaCha8Rng,
        rooms: &mut Vec<(Room, Option<Pos>)>,
        left: usize,
        entry_wall: Wall,
        entry: Pos,
    ) -> bool {
        let max = self.max_side as i32;
        let width = rng.gen_range(MIN_ROOM_SIDE..=max);
        let height = rng.gen_range(MIN_ROOM_SIDE..=max);
        let top = if rooms.is_empty() {
            entry
        } else {
            match entry_wall {
                Wall::Right => Pos::new(rng.gen_range(entry.row - height + 2..entry.row), entry.col - width + 1),
                Wall::Bottom => Pos::new(entry.row - height + 1, rng.gen_range(entry.col - width + 2..entry.col)),
                Wall::Left => Pos::new(rng.gen_range(entry.row - height + 2..entry.row), entry.col),
                Wall::Top => Pos::new(entry.row, rng.gen_range(entry.col - width + 2..entry.col)),
            }
        };
        if top.row < 0 || top.col < 0 || top.row + height > GRID_SIDE || top.col + width > GRID_SIDE {
            return false;
        }
        let room = Room { top, height, width };
        let n = rooms.len();
        // only the previous room may share a wall with the new one
        let others = &rooms[..n.saturating_sub(1)];
        if others.iter().any(|(r, _)| overlaps(r, &room)) {
            return false;
        }
        rooms.push((room, (n > 0).then_some(entry)));
        if left == 1 {
            return true;
        }
        for _ in 0..EXIT_TRIES {
            let choices: Vec<Wall> = Wall::ALL.into_iter().filter(|w| *w != entry_wall).collect();
            let exit_wall = choices[rng.gen_range(0..choices.len())];
            let exit = match exit_wall {
                Wall::Right => Pos::new(top.row + rng.gen_range(1..height - 1), top.col + width - 1),
                Wall::Bottom => Pos::new(top.row + height - 1, top.col + rng.gen_range(1..width - 1)),
                Wall::Left => Pos::new(top.row + rng.gen_range(1..height - 1), top.col),
                Wall::Top => Pos::new(top.row, top.col + rng.gen_range(1..width - 1)),
            };
            if self.place_room(rng, rooms, left - 1, exit_wall.opposite(), exit) {
                return true;
            }
        }
        // keep this room even if its successors failed, like the walk it mimics;
        // the caller rejects chains that fall short
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Wall {
    Right,
    Bottom,
    Left,
    Top,
}

impl Wall {
    const ALL: [Wall; 4] = [Wall::Right, Wall::Bottom, Wall::Left, Wall::Top];

    fn opposite(self) -> Self {
        match self {
            Wall::Right => Wall::Left,
            Wall::Bottom => Wall::Top,
            Wall::Left => Wall::Right,
            Wall::Top => Wall::Bottom,
        }
    }
}

fn overlaps(a: &Room, b: &Room) -> bool {
    let rows = a.top.row < b.top.row + b.height && b.top.row < a.top.row + a.height;
    let cols = a.top.col < b.top.col + b.width && b.top.col < a.top.col + a.width;
    rows && cols
}

fn random_interior(rng: &mut ChaCha8Rng, room: &Room) -> Pos {
    Pos::new(
        room.top.row + rng.gen_range(1..room.height - 1),
        room.top.col + rng.gen_range(1..room.width - 1),
    )
}

impl LayoutGenerator for MultiRoom {
    fn descriptor(&self) -> String {
        format!("MultiRoom-N{}-S{}", self.rooms, self.max_side)
    }

    fn max_steps(&self) -> u32 {
        20 * self.rooms
    }

    fn try_layout(&self, rng: &mut ChaCha8Rng, scenario: &Scenario, seed: u64) -> Option<GridState> {
        let placed = self.place_rooms(rng)?;
        let mut g = GridState::blank(GRID_SIDE, GRID_SIDE, scenario.clone(), seed);
        for (room, _) in &placed {
            for r in 1..room.height - 1 {
                for c in 1..room.width - 1 {
                    g.set_cell(Pos::new(room.top.row + r, room.top.col + c), Cell::Floor);
                }
            }
        }
        let mut prev_color: Option<Color> = None;
        for (_, entry) in &placed {
            if let Some(door) = entry {
                let palette: Vec<Color> = Color::ALL.into_iter().filter(|c| Some(*c) != prev_color).collect();
                let color = palette[rng.gen_range(0..palette.len())];
                g.set_cell(
                    *door,
                    Cell::Door {
                        color,
                        state: DoorState::Closed,
                    },
                );
                prev_color = Some(color);
            }
        }
        let first = placed[0].0;
        let last = placed[placed.len() - 1].0;
        let agent = random_interior(rng, &first);
        let heading = Heading::ALL[rng.gen_range(0..4)];
        g.place_agent(agent, heading);
        let goal = random_interior(rng, &last);
        g.set_cell(goal, Cell::Goal);
        g.rooms = placed.into_iter().map(|(r, _)| r).collect();
        Some(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::generate;

    #[test]
    fn rooms_chain_with_doors() {
        let s: Scenario = "MultiRoom-N4-S5".parse().unwrap();
        for seed in 0..50 {
            let g = generate(&s, seed).unwrap();
            assert_eq!(g.rooms().len(), 4);
            let doors = g.cells().iter().filter(|c| matches!(c, Cell::Door { .. })).count();
            assert_eq!(doors, 3);
            for r in g.rooms() {
                assert!(r.height >= 4 && r.height <= 5 && r.width >= 4 && r.width <= 5);
            }
            assert!(g.rooms()[0].interior_contains(g.agent()));
            assert_eq!(g.cell(g.agent()), Cell::Floor);
            let goals: Vec<Pos> = g.positions().filter(|p| g.cell(*p) == Cell::Goal).collect();
            assert_eq!(goals.len(), 1);
            assert!(g.rooms()[3].interior_contains(goals[0]));
        }
    }

    #[test]
    fn same_seed_same_layout() {
        let s: Scenario = "MultiRoom-N2-S4".parse().unwrap();
        assert_eq!(generate(&s, 0).unwrap(), generate(&s, 0).unwrap());
        assert_ne!(generate(&s, 0).unwrap().cells(), generate(&s, 1).unwrap().cells());
    }
}
