//! Invariant cores of successful behaviour in tabular MDPs, and how peer
//! drift in two-player Markov games erodes them.
//!
//! The pipeline: build or load a [`TabularMdp`], enumerate its success set
//! with [`enumerate_successes`], optionally store it in a [`TrajectoryTrie`],
//! and mine the `≼`-maximal common subsequences with [`core`]. For games,
//! [`induce_mdp`] folds a peer policy into the dynamics and [`drift_report`]
//! compares consecutive episodes.
//!
//! Everything numeric is generic over [`Scalar`]; the aliases below fix the
//! common choices.

pub mod abstraction;
pub mod drift;
pub mod envs;
pub mod error;
pub mod io;
pub mod mdp;
pub mod mining;
pub mod scalar;
pub mod trajectory;
pub mod trie;

pub use abstraction::{apply_abstraction, format_sequence, Abstraction, Symbol};
pub use drift::{
    budget_of, drift_report, episode_cores, individual_core, kernel_distance, reward_distance, variation_budget,
    BudgetReport, DriftReport, EpisodeCore, EpisodeSequence, Limits, Prototype, StepDrift,
};
pub use error::{ConfigError, EnumerationError, Error, MiningError, ValidationError};
pub use mdp::{
    enumerate_successes, enumerate_successes_with, induce_mdp, is_successful, rollout, shortest_success_length,
    validate_mdp, Kernel, MarkovGame, PeerPolicy, RewardTable, RolloutError, TabularMdp, DEFAULT_NODE_BUDGET,
};
pub use mining::{
    brute_force_core, brute_force_maximal, common_subsequences, core, core_nonempty_witness, core_with, is_subsequence,
    lcs_pair, maximal_common_subsequences, CoreSet, DEFAULT_CORE_BUDGET,
};
pub use scalar::Scalar;
pub use trajectory::{Action, Pair, RolloutSet, SuccessSet, Trajectory};
pub use trie::{build_trie, is_complete, is_complete_with, successful_leaves, TrajectoryTrie};

/// Exact rational scalar.
pub type Rational = num_rational::Ratio<i64>;

pub type Mdp = TabularMdp<f64>;
pub type MdpF32 = TabularMdp<f32>;
pub type ExactMdp = TabularMdp<Rational>;
pub type Game = MarkovGame<f64>;
pub type ExactGame = MarkovGame<Rational>;
pub type Policy = PeerPolicy<f64>;
pub type ExactPolicy = PeerPolicy<Rational>;
