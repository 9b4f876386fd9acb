//! Instance generators: key–door corridors and random tabular models.

pub mod coop;
pub mod keydoor;
pub mod random;

pub use coop::{build_coop_keydoor, CoopKeyDoor, CoopKeyDoorConfig, PeerMode};
pub use keydoor::{build_keydoor, KeyDoor, KeyDoorConfig};
pub use random::{random_family, random_game, random_mdp, random_peer};

/// Symbol names used by the key–door abstractions.
pub mod names {
    pub const MOVE: &str = "move";
    pub const FIND_KEY: &str = "find_key";
    pub const REACH_DOOR: &str = "reach_door";
    pub const OPEN_DOOR: &str = "open_door";
    pub const DROP_KEY_FOR_PEER: &str = "drop_key_for_peer";
    pub const PEER_REACHES_DOOR: &str = "peer_reaches_door";
    pub const PEER_OPENS_DOOR: &str = "peer_opens_door";
    pub const TERMINAL: &str = "terminal";
}
