use serde::{Deserialize, Serialize};

use super::{EnvError, Scenario, NUM_ACTIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Red,
    Green,
    Blue,
    Purple,
    Yellow,
    Grey,
}

impl Color {
    pub const ALL: [Color; 6] = [
        Color::Red,
        Color::Green,
        Color::Blue,
        Color::Purple,
        Color::Yellow,
        Color::Grey,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DoorState {
    Open,
    Closed,
    Locked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    Wall,
    Floor,
    Door { color: Color, state: DoorState },
    Key(Color),
    Goal,
}

impl Cell {
    /// Whether the agent may stand on this cell.
    pub fn walkable(self) -> bool {
        matches!(
            self,
            Cell::Floor
                | Cell::Goal
                | Cell::Door {
                    state: DoorState::Open,
                    ..
                }
        )
    }

    /// Whether light passes through (walls and shut doors block sight).
    pub fn transparent(self) -> bool {
        !matches!(
            self,
            Cell::Wall
                | Cell::Door {
                    state: DoorState::Closed | DoorState::Locked,
                    ..
                }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::North, Heading::East, Heading::South, Heading::West];

    pub fn left(self) -> Self {
        match self {
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
            Heading::East => Heading::North,
        }
    }

    pub fn right(self) -> Self {
        match self {
            Heading::North => Heading::East,
            Heading::East => Heading::South,
            Heading::South => Heading::West,
            Heading::West => Heading::North,
        }
    }

    /// (row, col) unit step.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Heading::North => (-1, 0),
            Heading::East => (0, 1),
            Heading::South => (1, 0),
            Heading::West => (0, -1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub row: i32,
    pub col: i32,
}

impl Pos {
    pub fn new(row: i32, col: i32) -> Self {
        Self { row, col }
    }

    pub fn step(self, h: Heading) -> Self {
        let (dr, dc) = h.delta();
        Self::new(self.row + dr, self.col + dc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    TurnLeft,
    TurnRight,
    Forward,
    Pickup,
    Drop,
    Toggle,
    Done,
}

impl Action {
    pub const ALL: [Action; NUM_ACTIONS] = [
        Action::TurnLeft,
        Action::TurnRight,
        Action::Forward,
        Action::Pickup,
        Action::Drop,
        Action::Toggle,
        Action::Done,
    ];

    pub fn from_index(i: usize) -> Result<Self, EnvError> {
        Self::ALL.get(i).copied().ok_or(EnvError::BadAction(i))
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Outer rectangle of a room, walls included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Room {
    pub top: Pos,
    pub height: i32,
    pub width: i32,
}

impl Room {
    pub fn contains(&self, p: Pos) -> bool {
        p.row >= self.top.row
            && p.row < self.top.row + self.height
            && p.col >= self.top.col
            && p.col < self.top.col + self.width
    }

    pub fn interior_contains(&self, p: Pos) -> bool {
        p.row > self.top.row
            && p.row < self.top.row + self.height - 1
            && p.col > self.top.col
            && p.col < self.top.col + self.width - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub done: bool,
    pub reached_goal: bool,
}

/// Full simulator state of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub(crate) height: i32,
    pub(crate) width: i32,
    pub(crate) cells: Vec<Cell>,
    pub(crate) agent: Pos,
    pub(crate) heading: Heading,
    pub(crate) carrying: Option<Color>,
    pub(crate) steps: u32,
    pub(crate) max_steps: u32,
    pub(crate) done: bool,
    pub(crate) seed: u64,
    pub(crate) scenario: Scenario,
    pub(crate) rooms: Vec<Room>,
}

impl GridState {
    /// Empty walled grid; generators carve into it.
    pub(crate) fn blank(height: i32, width: i32, scenario: Scenario, seed: u64) -> Self {
        let max_steps = scenario.max_steps();
        Self {
            height,
            width,
            cells: vec![Cell::Wall; (height * width) as usize],
            agent: Pos::new(0, 0),
            heading: Heading::East,
            carrying: None,
            steps: 0,
            max_steps,
            done: false,
            seed,
            scenario,
            rooms: Vec::new(),
        }
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.row >= 0 && p.col >= 0 && p.row < self.height && p.col < self.width
    }

    /// Cell at `p`; out-of-bounds reads as wall.
    pub fn cell(&self, p: Pos) -> Cell {
        if self.in_bounds(p) {
            self.cells[(p.row * self.width + p.col) as usize]
        } else {
            Cell::Wall
        }
    }

    pub fn set_cell(&mut self, p: Pos, c: Cell) {
        assert!(self.in_bounds(p), "cell {p:?} outside grid");
        let w = self.width;
        self.cells[(p.row * w + p.col) as usize] = c;
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn agent(&self) -> Pos {
        self.agent
    }

    pub fn heading(&self) -> Heading {
        self.heading
    }

    pub fn carrying(&self) -> Option<Color> {
        self.carrying
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn max_steps(&self) -> u32 {
        self.max_steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn rooms(&self) -> &[Room] {
        &self.rooms
    }

    /// Index of the room whose outer rectangle contains `p` (first match).
    pub fn room_of(&self, p: Pos) -> Option<usize> {
        self.rooms
            .iter()
            .position(|r| r.interior_contains(p))
            .or_else(|| self.rooms.iter().position(|r| r.contains(p)))
    }

    pub fn front(&self) -> Pos {
        self.agent.step(self.heading)
    }

    /// Places the agent, e.g. for hand-built test layouts.
    pub fn place_agent(&mut self, p: Pos, h: Heading) {
        self.agent = p;
        self.heading = h;
    }

    pub fn set_carrying(&mut self, c: Option<Color>) {
        self.carrying = c;
    }

    pub fn positions(&self) -> impl Iterator<Item = Pos> + '_ {
        (0..self.height).flat_map(move |r| (0..self.width).map(move |c| Pos::new(r, c)))
    }

    /// Applies one action in place.
    pub fn step_in_place(&mut self, action: usize) -> Result<StepOutcome, EnvError> {
        let action = Action::from_index(action)?;
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        let mut reached_goal = false;
        let ahead = self.front();
        let ahead_cell = self.cell(ahead);
        match action {
            Action::TurnLeft => self.heading = self.heading.left(),
            Action::TurnRight => self.heading = self.heading.right(),
            Action::Forward => {
                if ahead_cell.walkable() {
                    self.agent = ahead;
                    if ahead_cell == Cell::Goal {
                        reached_goal = true;
                    }
                }
            }
            Action::Pickup => {
                if let (Cell::Key(color), None) = (ahead_cell, self.carrying) {
                    self.carrying = Some(color);
                    self.set_cell(ahead, Cell::Floor);
                }
            }
            Action::Drop => {
                if let (Some(color), Cell::Floor) = (self.carrying, ahead_cell) {
                    self.set_cell(ahead, Cell::Key(color));
                    self.carrying = None;
                }
            }
            Action::Toggle => {
                if let Cell::Door { color, state } = ahead_cell {
                    let next = match state {
                        DoorState::Open => DoorState::Closed,
                        DoorState::Closed => DoorState::Open,
                        DoorState::Locked if self.carrying == Some(color) => DoorState::Open,
                        DoorState::Locked => DoorState::Locked,
                    };
                    self.set_cell(ahead, Cell::Door { color, state: next });
                }
            }
            Action::Done => {}
        }
        self.steps += 1;
        let reward = if reached_goal && !self.scenario.reward_free() {
            1.0
        } else {
            0.0
        };
        let done = reached_goal || self.steps >= self.max_steps;
        self.done = done;
        Ok(StepOutcome {
            reward,
            done,
            reached_goal,
        })
    }

    /// Value-semantics transition.
    pub fn step(&self, action: usize) -> Result<(GridState, StepOutcome), EnvError> {
        let mut next = self.clone();
        let out = next.step_in_place(action)?;
        Ok((next, out))
    }
}
