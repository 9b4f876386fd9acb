//! Symbols and the abstraction map `φ : S × A → Σ`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::MiningError;
use crate::trajectory::{Pair, Trajectory};

/// Alphabet element: either a concrete pair or an abstract name.
///
/// Concrete pairs order before names.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Pair(Pair),
    Named(String),
}

impl Symbol {
    pub fn named(name: impl Into<String>) -> Self {
        Symbol::Named(name.into())
    }
}

impl From<Pair> for Symbol {
    fn from(p: Pair) -> Self {
        Symbol::Pair(p)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Pair(p) => write!(f, "{p}"),
            Symbol::Named(n) => f.write_str(n),
        }
    }
}

impl FromStr for Symbol {
    type Err = std::convert::Infallible;

    /// `"(s,a)"` parses as a pair, anything else as a name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<Pair>() {
            Ok(p) => Symbol::Pair(p),
            Err(_) => Symbol::Named(s.to_string()),
        })
    }
}

impl Serialize for Symbol {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(s.parse().expect("infallible"))
    }
}

/// Renders a symbol sequence as space-separated text.
pub fn format_sequence(seq: &[Symbol]) -> String {
    seq.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Map from concrete pairs (terminal pairs included) to symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Abstraction {
    label: String,
    /// `None` is the identity map.
    mapping: Option<BTreeMap<Pair, Symbol>>,
    collapse_runs: bool,
}

impl Default for Abstraction {
    fn default() -> Self {
        Self::identity()
    }
}

impl Abstraction {
    pub fn identity() -> Self {
        Abstraction { label: "identity".to_string(), mapping: None, collapse_runs: false }
    }

    pub fn from_map(label: impl Into<String>, mapping: BTreeMap<Pair, Symbol>) -> Self {
        Abstraction { label: label.into(), mapping: Some(mapping), collapse_runs: false }
    }

    pub fn with_collapse_runs(mut self, collapse: bool) -> Self {
        self.collapse_runs = collapse;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.is_none()
    }

    pub fn collapse_runs(&self) -> bool {
        self.collapse_runs
    }

    pub fn mapping(&self) -> Option<&BTreeMap<Pair, Symbol>> {
        self.mapping.as_ref()
    }

    pub fn image(&self, pair: Pair) -> Result<Symbol, MiningError> {
        match &self.mapping {
            None => Ok(Symbol::Pair(pair)),
            Some(m) => m.get(&pair).cloned().ok_or(MiningError::UnmappedSymbol(pair)),
        }
    }

    /// Distinct images of the terminal pairs ending the given trajectories.
    pub fn terminal_images<'a>(
        &self,
        trajs: impl IntoIterator<Item = &'a Trajectory>,
    ) -> Result<BTreeSet<Symbol>, MiningError> {
        trajs.into_iter().filter_map(|t| t.terminal_state()).map(|g| self.image(Pair::terminal(g))).collect()
    }
}

/// `φ(τ)`: elementwise image, with equal-symbol runs collapsed when the
/// abstraction asks for it.
pub fn apply_abstraction(traj: &Trajectory, phi: &Abstraction) -> Result<Vec<Symbol>, MiningError> {
    let mut out: Vec<Symbol> = Vec::with_capacity(traj.len());
    for &p in traj.pairs() {
        let sym = phi.image(p)?;
        if phi.collapse_runs && out.last() == Some(&sym) {
            continue;
        }
        out.push(sym);
    }
    Ok(out)
}
