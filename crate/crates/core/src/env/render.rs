use super::{Cell, DoorState, GridState, Heading, Pos};

/// ASCII rendering: `#` wall, `.` floor, `G` goal, `k` key, doors as
/// `/` open, `+` closed, `L` locked, agent as an arrow.
pub fn render_ascii(state: &GridState) -> String {
    let mut out = String::with_capacity(((state.width() + 1) * state.height()) as usize);
    for r in 0..state.height() {
        for c in 0..state.width() {
            let p = Pos::new(r, c);
            let ch = if p == state.agent() {
                match state.heading() {
                    Heading::North => '^',
                    Heading::East => '>',
                    Heading::South => 'v',
                    Heading::West => '<',
                }
            } else {
                match state.cell(p) {
                    Cell::Wall => '#',
                    Cell::Floor => '.',
                    Cell::Goal => 'G',
                    Cell::Key(_) => 'k',
                    Cell::Door {
                        state: DoorState::Open, ..
                    } => '/',
                    Cell::Door {
                        state: DoorState::Closed,
                        ..
                    } => '+',
                    Cell::Door {
                        state: DoorState::Locked,
                        ..
                    } => 'L',
                }
            };
            out.push(ch);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{generate, Scenario};

    #[test]
    fn renders_one_agent_and_goal() {
        let s: Scenario = "KeyCorridor-S3-R3".parse().unwrap();
        let g = generate(&s, 2).unwrap();
        let txt = render_ascii(&g);
        assert_eq!(txt.lines().count(), 7);
        assert_eq!(txt.chars().filter(|c| "^>v<".contains(*c)).count(), 1);
        assert_eq!(txt.matches('G').count(), 1);
        assert_eq!(txt.matches('L').count(), 1);
    }
}
