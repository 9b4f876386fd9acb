//! Cooperative two-agent key–door corridor.
//!
//! Both agents share the corridor. Only the peer can open the door, and it
//! needs the key to do so. The focal agent (agent 1) can pick the key up and
//! drop it where it stands; the peer can pick up any key lying on its cell.
//! The focal agent succeeds on reaching the goal cell behind the door.
//!
//! Both agents act on the same pre-step state. If both try to take the key in
//! one step, the focal agent gets it. A door opened in one step is `Opening`
//! for exactly one state, then `Open`.
//!
//! Two peer behaviours make up a schedule:
//! - `Helper` waits for the focal agent to drop the key, collects it, walks
//!   to the door and opens it;
//! - `Independent` fetches the key on its own (or collects a dropped one) and
//!   opens the door.
//!
//! Under `Helper` every success contains
//! `drop_key_for_peer → peer_reaches_door → peer_opens_door`; under
//! `Independent` the focal agent can just walk, so the prototype disappears.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::names;
use crate::abstraction::{Abstraction, Symbol};
use crate::error::ConfigError;
use crate::mdp::{induce_mdp, shortest_success_length, MarkovGame, PeerPolicy};
use crate::scalar::Scalar;
use crate::trajectory::Pair;

pub const FOCAL_LEFT: usize = 0;
pub const FOCAL_RIGHT: usize = 1;
pub const FOCAL_PICKUP: usize = 2;
pub const FOCAL_DROP: usize = 3;
pub const NUM_FOCAL_ACTIONS: usize = 4;

pub const PEER_WAIT: usize = 0;
pub const PEER_LEFT: usize = 1;
pub const PEER_RIGHT: usize = 2;
pub const PEER_PICKUP: usize = 3;
pub const PEER_OPEN: usize = 4;
pub const NUM_PEER_ACTIONS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeerMode {
    Helper,
    Independent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoopKeyDoorConfig {
    pub corridor_length: usize,
    pub key_pos: usize,
    pub door_pos: usize,
    pub goal_pos: usize,
    pub start_pos: usize,
    pub peer_start: usize,
    pub horizon: usize,
    pub schedule: Vec<PeerMode>,
}

impl Default for CoopKeyDoorConfig {
    fn default() -> Self {
        CoopKeyDoorConfig {
            corridor_length: 4,
            key_pos: 0,
            door_pos: 2,
            goal_pos: 3,
            start_pos: 0,
            peer_start: 2,
            horizon: 8,
            schedule: vec![PeerMode::Helper, PeerMode::Independent],
        }
    }
}

impl CoopKeyDoorConfig {
    fn validate_layout(&self) -> Result<(), ConfigError> {
        let n = self.corridor_length;
        for (name, pos) in [
            ("key_pos", self.key_pos),
            ("door_pos", self.door_pos),
            ("goal_pos", self.goal_pos),
            ("start_pos", self.start_pos),
            ("peer_start", self.peer_start),
        ] {
            if pos >= n {
                return Err(ConfigError(format!("{name} = {pos} outside corridor of length {n}")));
            }
        }
        if !(self.key_pos < self.door_pos && self.door_pos < self.goal_pos) {
            return Err(ConfigError("need key_pos < door_pos < goal_pos".into()));
        }
        if self.start_pos > self.door_pos || self.peer_start > self.door_pos {
            return Err(ConfigError("both agents must start at or before the door".into()));
        }
        if self.schedule.is_empty() {
            return Err(ConfigError("schedule must list at least one episode".into()));
        }
        if self.horizon == 0 {
            return Err(ConfigError("horizon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Key {
    Floor { pos: usize, dropped: bool },
    Focal,
    Peer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Door {
    Closed,
    Opening,
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum World {
    Running { focal: usize, peer: usize, key: Key, door: Door },
    Goal,
}

struct Dynamics<'a> {
    cfg: &'a CoopKeyDoorConfig,
}

impl Dynamics<'_> {
    fn walk(&self, pos: usize, right: bool, door: Door) -> usize {
        if !right {
            pos.saturating_sub(1)
        } else if pos + 1 < self.cfg.corridor_length && !(pos == self.cfg.door_pos && door == Door::Closed) {
            pos + 1
        } else {
            pos
        }
    }

    fn step(&self, w: World, a1: usize, a2: usize) -> World {
        let World::Running { focal, peer, key, door } = w else {
            return World::Goal;
        };
        let mut next_focal = focal;
        let mut next_peer = peer;
        let mut next_key = key;
        let mut next_door = if door == Door::Opening { Door::Open } else { door };

        match a1 {
            FOCAL_LEFT => next_focal = self.walk(focal, false, door),
            FOCAL_RIGHT => next_focal = self.walk(focal, true, door),
            FOCAL_PICKUP => {
                if matches!(key, Key::Floor { pos, .. } if pos == focal) {
                    next_key = Key::Focal;
                }
            }
            _ => {
                if key == Key::Focal {
                    next_key = Key::Floor { pos: focal, dropped: true };
                }
            }
        }
        let focal_took_key = next_key == Key::Focal && key != Key::Focal;
        match a2 {
            PEER_LEFT => next_peer = self.walk(peer, false, door),
            PEER_RIGHT => next_peer = self.walk(peer, true, door),
            PEER_PICKUP => {
                if !focal_took_key && matches!(key, Key::Floor { pos, .. } if pos == peer) {
                    next_key = Key::Peer;
                }
            }
            PEER_OPEN if key == Key::Peer && peer == self.cfg.door_pos && door == Door::Closed => {
                next_door = Door::Opening;
            }
            _ => {}
        }
        if next_focal == self.cfg.goal_pos {
            return World::Goal;
        }
        World::Running { focal: next_focal, peer: next_peer, key: next_key, door: next_door }
    }

    fn toward(&self, from: usize, to: usize) -> usize {
        match from.cmp(&to) {
            std::cmp::Ordering::Less => PEER_RIGHT,
            std::cmp::Ordering::Greater => PEER_LEFT,
            std::cmp::Ordering::Equal => PEER_WAIT,
        }
    }

    fn peer_choice(&self, w: World, mode: PeerMode) -> usize {
        let World::Running { peer, key, door, .. } = w else {
            return PEER_WAIT;
        };
        match key {
            Key::Peer if door == Door::Closed => {
                if peer == self.cfg.door_pos {
                    PEER_OPEN
                } else {
                    self.toward(peer, self.cfg.door_pos)
                }
            }
            Key::Floor { pos, dropped } if dropped || mode == PeerMode::Independent => {
                if peer == pos {
                    PEER_PICKUP
                } else {
                    self.toward(peer, pos)
                }
            }
            _ => PEER_WAIT,
        }
    }

    fn focal_symbol(&self, w: World, a1: usize) -> &'static str {
        let World::Running { focal, peer, key, door } = w else {
            return names::MOVE;
        };
        match (a1, key) {
            (FOCAL_PICKUP, Key::Floor { pos, .. }) if pos == focal => names::FIND_KEY,
            (FOCAL_DROP, Key::Focal) => names::DROP_KEY_FOR_PEER,
            _ if key == Key::Peer && peer == self.cfg.door_pos && door == Door::Closed => names::PEER_REACHES_DOOR,
            _ if door == Door::Opening => names::PEER_OPENS_DOOR,
            _ => names::MOVE,
        }
    }
}

fn describe(w: World) -> String {
    match w {
        World::Goal => "goal".to_string(),
        World::Running { focal, peer, key, door } => {
            let key = match key {
                Key::Floor { pos, dropped: false } => format!("floor@{pos}"),
                Key::Floor { pos, dropped: true } => format!("dropped@{pos}"),
                Key::Focal => "focal".to_string(),
                Key::Peer => "peer".to_string(),
            };
            let door = match door {
                Door::Closed => "closed",
                Door::Opening => "opening",
                Door::Open => "open",
            };
            format!("focal={focal} peer={peer} key={key} door={door}")
        }
    }
}

/// A generated cooperative instance: game, peer schedule and abstraction.
#[derive(Clone, Debug)]
pub struct CoopKeyDoor<T> {
    pub game: MarkovGame<T>,
    pub schedule: Vec<PeerPolicy<T>>,
    pub phi: Abstraction,
    pub state_names: Vec<String>,
}

impl<T: Scalar> CoopKeyDoor<T> {
    pub fn policy(&self, mode: PeerMode) -> &PeerPolicy<T> {
        let label = mode_label(mode);
        self.schedule.iter().find(|p| p.label().ends_with(label)).expect("mode present in schedule")
    }
}

fn mode_label(mode: PeerMode) -> &'static str {
    match mode {
        PeerMode::Helper => "helper",
        PeerMode::Independent => "independent",
    }
}

/// Builds the joint-deterministic game over the states reachable from the
/// start, one deterministic peer policy per scheduled episode, and the
/// abstraction onto
/// `{move, find_key, drop_key_for_peer, peer_reaches_door, peer_opens_door, terminal}`.
///
/// Fails if either peer mode admits no success within the horizon.
pub fn build_coop_keydoor<T: Scalar>(cfg: &CoopKeyDoorConfig) -> Result<CoopKeyDoor<T>, ConfigError> {
    cfg.validate_layout()?;
    let dynamics = Dynamics { cfg };
    let start = World::Running {
        focal: cfg.start_pos,
        peer: cfg.peer_start,
        key: Key::Floor { pos: cfg.key_pos, dropped: false },
        door: Door::Closed,
    };
    if cfg.start_pos == cfg.goal_pos {
        return Err(ConfigError("focal agent starts on the goal".into()));
    }

    // reachable states in breadth-first order
    let mut worlds = vec![start];
    let mut index: HashMap<World, usize> = HashMap::from([(start, 0)]);
    let mut queue = VecDeque::from([start]);
    while let Some(w) = queue.pop_front() {
        for a1 in 0..NUM_FOCAL_ACTIONS {
            for a2 in 0..NUM_PEER_ACTIONS {
                let next = dynamics.step(w, a1, a2);
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(next) {
                    e.insert(worlds.len());
                    worlds.push(next);
                    queue.push_back(next);
                }
            }
        }
    }
    let Some(&goal) = index.get(&World::Goal) else {
        return Err(ConfigError("goal unreachable for every joint behaviour".into()));
    };

    let n = worlds.len();
    let mut joint = vec![T::zero(); n * NUM_FOCAL_ACTIONS * NUM_PEER_ACTIONS * n];
    let mut reward = vec![T::zero(); n * NUM_FOCAL_ACTIONS * NUM_PEER_ACTIONS];
    for (s, &w) in worlds.iter().enumerate() {
        for a1 in 0..NUM_FOCAL_ACTIONS {
            for a2 in 0..NUM_PEER_ACTIONS {
                let j = (s * NUM_FOCAL_ACTIONS + a1) * NUM_PEER_ACTIONS + a2;
                let next = index[&dynamics.step(w, a1, a2)];
                joint[j * n + next] = T::one();
                if next == goal && s != goal {
                    reward[j] = T::one();
                }
            }
        }
    }
    let mut initial = vec![T::zero(); n];
    initial[0] = T::one();
    let game = MarkovGame::new(n, NUM_FOCAL_ACTIONS, NUM_PEER_ACTIONS, joint, reward, cfg.horizon, [goal], initial)
        .expect("generated coop game is valid");

    let policy_for = |mode: PeerMode, e: usize| {
        PeerPolicy::deterministic(format!("e{}:{}", e + 1, mode_label(mode)), n, NUM_PEER_ACTIONS, |s| {
            dynamics.peer_choice(worlds[s], mode)
        })
    };
    for mode in [PeerMode::Helper, PeerMode::Independent] {
        let m = induce_mdp(&game, &policy_for(mode, 0)).expect("induced MDP is valid");
        match shortest_success_length(&m) {
            Some(len) if len <= cfg.horizon => {}
            Some(len) => {
                return Err(ConfigError(format!(
                    "{} peer needs {len} states to succeed, horizon is {}",
                    mode_label(mode),
                    cfg.horizon
                )))
            }
            None => return Err(ConfigError(format!("no success with a {} peer", mode_label(mode)))),
        }
    }
    let schedule = cfg.schedule.iter().enumerate().map(|(e, &m)| policy_for(m, e)).collect();

    let mut map = BTreeMap::new();
    for (s, &w) in worlds.iter().enumerate() {
        for a1 in 0..NUM_FOCAL_ACTIONS {
            map.insert(Pair::step(s, a1), Symbol::named(dynamics.focal_symbol(w, a1)));
        }
    }
    map.insert(Pair::terminal(goal), Symbol::named(names::TERMINAL));
    let phi = Abstraction::from_map("coop-keydoor", map);

    Ok(CoopKeyDoor { game, schedule, phi, state_names: worlds.into_iter().map(describe).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::apply_abstraction;
    use crate::mdp::enumerate_successes;
    use crate::mining::is_subsequence;

    fn prototype() -> Vec<Symbol> {
        [names::DROP_KEY_FOR_PEER, names::PEER_REACHES_DOOR, names::PEER_OPENS_DOOR].map(Symbol::named).to_vec()
    }

    #[test]
    fn helper_successes_all_carry_the_prototype() {
        let env = build_coop_keydoor::<f64>(&CoopKeyDoorConfig::default()).unwrap();
        let m = induce_mdp(&env.game, env.policy(PeerMode::Helper)).unwrap();
        let s = enumerate_successes(&m).unwrap();
        assert!(!s.is_empty());
        for t in &s {
            assert!(is_subsequence(&prototype(), &apply_abstraction(t, &env.phi).unwrap()), "{t}");
        }
    }

    #[test]
    fn independent_successes_can_skip_the_drop() {
        let env = build_coop_keydoor::<f64>(&CoopKeyDoorConfig::default()).unwrap();
        let m = induce_mdp(&env.game, env.policy(PeerMode::Independent)).unwrap();
        let s = enumerate_successes(&m).unwrap();
        assert!(s.iter().any(|t| !is_subsequence(&prototype(), &apply_abstraction(t, &env.phi).unwrap())));
    }

    #[test]
    fn horizon_too_short_for_a_mode_is_rejected() {
        let cfg = CoopKeyDoorConfig { horizon: 7, ..CoopKeyDoorConfig::default() };
        let err = build_coop_keydoor::<f64>(&cfg).unwrap_err();
        assert!(err.0.contains("peer"), "{err}");
    }

    #[test]
    fn schedule_labels_follow_episodes() {
        let cfg = CoopKeyDoorConfig {
            schedule: vec![PeerMode::Helper, PeerMode::Helper, PeerMode::Independent],
            ..CoopKeyDoorConfig::default()
        };
        let env = build_coop_keydoor::<f64>(&cfg).unwrap();
        let labels: Vec<&str> = env.schedule.iter().map(|p| p.label()).collect();
        assert_eq!(labels, ["e1:helper", "e2:helper", "e3:independent"]);
        assert_eq!(env.schedule[0].as_slice(), env.schedule[1].as_slice());
    }

    #[test]
    fn bad_layouts() {
        let base = CoopKeyDoorConfig::default();
        for cfg in [
            CoopKeyDoorConfig { peer_start: 3, ..base.clone() },
            CoopKeyDoorConfig { schedule: vec![], ..base.clone() },
            CoopKeyDoorConfig { door_pos: 0, ..base },
        ] {
            assert!(build_coop_keydoor::<f64>(&cfg).is_err(), "{cfg:?}");
        }
    }
}
