//! Single-agent key–door corridor.
//!
//! Positions `0..corridor_length`. The key lies left of the door, the goal
//! right of it. The agent may stand on the door cell, but cannot step from it
//! to the right until it has opened the door with the key. State is
//! `(position, has_key, door_open)` plus one absorbing goal state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::names;
use crate::abstraction::{Abstraction, Symbol};
use crate::error::ConfigError;
use crate::mdp::{Kernel, RewardTable, TabularMdp};
use crate::scalar::Scalar;
use crate::trajectory::Pair;

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;
pub const PICKUP: usize = 2;
pub const OPEN: usize = 3;
pub const NUM_ACTIONS: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyDoorConfig {
    pub corridor_length: usize,
    pub key_pos: usize,
    pub door_pos: usize,
    pub goal_pos: usize,
    pub start_pos: usize,
    /// Upper bound on states visited by a success.
    pub horizon: usize,
}

impl Default for KeyDoorConfig {
    fn default() -> Self {
        KeyDoorConfig { corridor_length: 4, key_pos: 0, door_pos: 2, goal_pos: 3, start_pos: 1, horizon: 8 }
    }
}

impl KeyDoorConfig {
    /// States visited by the shortest success: walk to the key, pick it up,
    /// walk to the door, open it, walk to the goal, plus the goal itself.
    pub fn shortest_solution(&self) -> usize {
        self.start_pos.abs_diff(self.key_pos)
            + 1
            + (self.door_pos - self.key_pos)
            + 1
            + (self.goal_pos - self.door_pos)
            + 1
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = self.corridor_length;
        for (name, pos) in [
            ("key_pos", self.key_pos),
            ("door_pos", self.door_pos),
            ("goal_pos", self.goal_pos),
            ("start_pos", self.start_pos),
        ] {
            if pos >= n {
                return Err(ConfigError(format!("{name} = {pos} outside corridor of length {n}")));
            }
        }
        if !(self.key_pos < self.door_pos && self.door_pos < self.goal_pos) {
            return Err(ConfigError("need key_pos < door_pos < goal_pos".into()));
        }
        if self.start_pos >= self.door_pos {
            return Err(ConfigError("start_pos must lie before the door".into()));
        }
        let shortest = self.shortest_solution();
        if self.horizon < shortest {
            return Err(ConfigError(format!("horizon {} below shortest solution length {shortest}", self.horizon)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Cell {
    pos: usize,
    key: bool,
    open: bool,
}

/// A generated single-agent instance.
#[derive(Clone, Debug)]
pub struct KeyDoor<T> {
    pub mdp: TabularMdp<T>,
    pub phi: Abstraction,
    pub state_names: Vec<String>,
}

/// Deterministic key–door MDP with a unique absorbing goal and its
/// abstraction onto `{move, find_key, reach_door, open_door, terminal}`.
pub fn build_keydoor<T: Scalar>(cfg: &KeyDoorConfig) -> Result<KeyDoor<T>, ConfigError> {
    cfg.validate()?;
    let n = cfg.corridor_length;
    let index = |c: Cell| (c.pos * 2 + usize::from(c.key)) * 2 + usize::from(c.open);
    let cell = |s: usize| Cell { pos: s / 4, key: (s / 2) % 2 == 1, open: s % 2 == 1 };
    let goal = 4 * n;
    let num_states = goal + 1;

    // next state, or `goal`
    let step = |c: Cell, a: usize| -> usize {
        let mut c = c;
        match a {
            LEFT => c.pos = c.pos.saturating_sub(1),
            RIGHT => {
                let blocked = c.pos == cfg.door_pos && !c.open;
                if c.pos + 1 < n && !blocked {
                    c.pos += 1;
                }
            }
            PICKUP => {
                if c.pos == cfg.key_pos {
                    c.key = true;
                }
            }
            _ => {
                if c.pos == cfg.door_pos && c.key {
                    c.open = true;
                }
            }
        }
        if c.pos == cfg.goal_pos {
            goal
        } else {
            index(c)
        }
    };

    let kernel = Kernel::from_fn(num_states, NUM_ACTIONS, |s, a, next| {
        let target = if s == goal { goal } else { step(cell(s), a) };
        if target == next {
            T::one()
        } else {
            T::zero()
        }
    });
    let reward = RewardTable::from_fn(num_states, NUM_ACTIONS, |s, a| {
        if s != goal && step(cell(s), a) == goal {
            T::one()
        } else {
            T::zero()
        }
    });
    let mut initial = vec![T::zero(); num_states];
    initial[index(Cell { pos: cfg.start_pos, key: false, open: false })] = T::one();
    let mdp =
        TabularMdp::new(kernel, reward, cfg.horizon, [goal], initial, true).expect("generated key-door MDP is valid");

    let mut map = BTreeMap::new();
    for s in 0..num_states {
        for a in 0..NUM_ACTIONS {
            let name = if s == goal {
                names::MOVE
            } else {
                let c = cell(s);
                match a {
                    PICKUP if c.pos == cfg.key_pos && !c.key => names::FIND_KEY,
                    OPEN if c.pos == cfg.door_pos && c.key && !c.open => names::OPEN_DOOR,
                    LEFT | RIGHT
                        if c.key
                            && !c.open
                            && c.pos != cfg.door_pos
                            && step(c, a) == index(Cell { pos: cfg.door_pos, ..c }) =>
                    {
                        names::REACH_DOOR
                    }
                    _ => names::MOVE,
                }
            };
            map.insert(Pair::step(s, a), Symbol::named(name));
        }
    }
    map.insert(Pair::terminal(goal), Symbol::named(names::TERMINAL));
    let phi = Abstraction::from_map("keydoor", map);

    let state_names = (0..num_states)
        .map(|s| {
            if s == goal {
                "goal".to_string()
            } else {
                let c = cell(s);
                format!("pos={} key={} door={}", c.pos, u8::from(c.key), if c.open { "open" } else { "closed" })
            }
        })
        .collect();
    Ok(KeyDoor { mdp, phi, state_names })
}
