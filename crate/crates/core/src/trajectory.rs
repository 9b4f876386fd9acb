//! State–action alphabet, trajectories and trajectory collections.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// An action slot in the state–action alphabet.
///
/// `Terminal` is a reserved pseudo-action marking the first goal visit; it
/// orders after every real action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Act(usize),
    Terminal,
}

/// One element of the concrete alphabet `S × (A ∪ {TERMINAL})`.
///
/// Ordered state-major, then action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair {
    pub state: usize,
    pub action: Action,
}

impl Pair {
    pub fn step(state: usize, action: usize) -> Self {
        Pair { state, action: Action::Act(action) }
    }

    pub fn terminal(state: usize) -> Self {
        Pair { state, action: Action::Terminal }
    }

    pub fn is_terminal(&self) -> bool {
        self.action == Action::Terminal
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.action {
            Action::Act(a) => write!(f, "({},{})", self.state, a),
            Action::Terminal => write!(f, "({},T)", self.state),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed state-action pair {0:?}, expected \"(s,a)\" or \"(s,T)\"")]
pub struct PairParseError(pub String);

impl FromStr for Pair {
    type Err = PairParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PairParseError(s.to_string());
        let inner = s.trim().strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(err)?;
        let (state, action) = inner.split_once(',').ok_or_else(err)?;
        let state = state.trim().parse().map_err(|_| err())?;
        let action = match action.trim() {
            "T" => Action::Terminal,
            a => Action::Act(a.parse().map_err(|_| err())?),
        };
        Ok(Pair { state, action })
    }
}

impl Serialize for Pair {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pair {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A state–action trajectory `(s1,a1,…,sT,aT)`, optionally closed by the
/// terminal pair `(g, TERMINAL)` when it reached a goal.
///
/// Ordering is lexicographic over the encoded symbol sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trajectory {
    pairs: Vec<Pair>,
}

impl Trajectory {
    /// Builds a trajectory from its encoded pairs. Only the last pair may be
    /// terminal.
    pub fn from_pairs(pairs: Vec<Pair>) -> Option<Self> {
        let n = pairs.len();
        if pairs.iter().take(n.saturating_sub(1)).any(Pair::is_terminal) {
            return None;
        }
        Some(Trajectory { pairs })
    }

    pub fn new(steps: &[(usize, usize)], terminal_state: Option<usize>) -> Self {
        let mut pairs: Vec<Pair> = steps.iter().map(|&(s, a)| Pair::step(s, a)).collect();
        pairs.extend(terminal_state.map(Pair::terminal));
        Trajectory { pairs }
    }

    /// Encoded symbols, including the terminal pair if present.
    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    /// The real action steps (terminal pair excluded).
    pub fn steps(&self) -> &[Pair] {
        match self.pairs.last() {
            Some(p) if p.is_terminal() => &self.pairs[..self.pairs.len() - 1],
            _ => &self.pairs,
        }
    }

    pub fn terminal_state(&self) -> Option<usize> {
        self.pairs.last().filter(|p| p.is_terminal()).map(|p| p.state)
    }

    pub fn is_terminated(&self) -> bool {
        self.terminal_state().is_some()
    }

    pub fn num_actions(&self) -> usize {
        self.steps().len()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub(crate) fn push(&mut self, pair: Pair) {
        debug_assert!(!self.is_terminated());
        self.pairs.push(pair);
    }

    pub(crate) fn pop(&mut self) -> Option<Pair> {
        self.pairs.pop()
    }
}

impl fmt::Display for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.pairs {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Deduplicated, canonically ordered set of successful trajectories (𝒮).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SuccessSet {
    trajectories: BTreeSet<Trajectory>,
}

impl SuccessSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, traj: Trajectory) -> bool {
        self.trajectories.insert(traj)
    }

    pub fn contains(&self, traj: &Trajectory) -> bool {
        self.trajectories.contains(traj)
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &Trajectory> + Clone {
        self.trajectories.iter()
    }

    /// `𝒮 ∪ 𝒮'`.
    pub fn union(&self, other: &SuccessSet) -> SuccessSet {
        SuccessSet { trajectories: self.trajectories.union(&other.trajectories).cloned().collect() }
    }

    pub fn is_subset(&self, other: &SuccessSet) -> bool {
        self.trajectories.is_subset(&other.trajectories)
    }
}

impl FromIterator<Trajectory> for SuccessSet {
    fn from_iter<I: IntoIterator<Item = Trajectory>>(iter: I) -> Self {
        SuccessSet { trajectories: iter.into_iter().collect() }
    }
}

impl<'a> IntoIterator for &'a SuccessSet {
    type Item = &'a Trajectory;
    type IntoIter = std::collections::btree_set::Iter<'a, Trajectory>;

    fn into_iter(self) -> Self::IntoIter {
        self.trajectories.iter()
    }
}

/// Multiset of sampled trajectories (Θ), successful or not.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RolloutSet {
    pub trajectories: Vec<Trajectory>,
    pub seed: u64,
    pub policy_label: String,
}

impl RolloutSet {
    pub fn successes(&self) -> impl Iterator<Item = &Trajectory> {
        self.trajectories.iter().filter(|t| t.is_terminated())
    }
}
