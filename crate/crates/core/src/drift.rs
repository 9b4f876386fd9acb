//! Episode sequences of induced MDPs: variation budget and core drift.
//!
//! When the peer's policy changes between episodes, the focal agent faces a
//! new induced MDP `M_e`. The variation budget sums the sup-norm drift of the
//! induced kernels and rewards; the drift report tracks which core prototypes
//! survive from one episode to the next.

use serde::Serialize;

use crate::abstraction::{apply_abstraction, Abstraction, Symbol};
use crate::error::{Error, ValidationError};
use crate::mdp::{
    enumerate_successes_with, induce_mdp, Kernel, MarkovGame, PeerPolicy, RewardTable, TabularMdp, DEFAULT_NODE_BUDGET,
};
use crate::mining::{core_with, is_subsequence, CoreSet, DEFAULT_CORE_BUDGET};
use crate::scalar::{sup, Scalar};
use crate::trajectory::{SuccessSet, Trajectory};

/// A game, a peer schedule `π₂¹ … π₂ᴱ`, and the induced `M₁ … M_E`.
#[derive(Clone, Debug)]
pub struct EpisodeSequence<T> {
    game: MarkovGame<T>,
    schedule: Vec<PeerPolicy<T>>,
    induced: Vec<TabularMdp<T>>,
}

impl<T: Scalar> EpisodeSequence<T> {
    pub fn new(game: MarkovGame<T>, schedule: Vec<PeerPolicy<T>>) -> Result<Self, ValidationError> {
        if schedule.is_empty() {
            return Err(ValidationError::EmptyDimension("schedule"));
        }
        let induced = schedule.iter().map(|p| induce_mdp(&game, p)).collect::<Result<Vec<_>, _>>()?;
        Ok(EpisodeSequence { game, schedule, induced })
    }

    pub fn game(&self) -> &MarkovGame<T> {
        &self.game
    }

    pub fn schedule(&self) -> &[PeerPolicy<T>] {
        &self.schedule
    }

    pub fn induced(&self) -> &[TabularMdp<T>] {
        &self.induced
    }

    pub fn episodes(&self) -> usize {
        self.induced.len()
    }
}

/// `‖P − P'‖_{1,∞}`: largest L1 distance between matching next-state rows.
pub fn kernel_distance<T: Scalar>(p: &Kernel<T>, prev: &Kernel<T>) -> Result<T, ValidationError> {
    if p.num_states() != prev.num_states() || p.num_actions() != prev.num_actions() {
        return Err(ValidationError::DimensionMismatch {
            what: "kernel",
            expected: prev.as_slice().len(),
            found: p.as_slice().len(),
        });
    }
    let rows = (0..p.num_states()).flat_map(|s| (0..p.num_actions()).map(move |a| (s, a)));
    Ok(sup(
        rows.map(|(s, a)| p.row(s, a).iter().zip(prev.row(s, a)).fold(T::zero(), |acc, (&x, &y)| acc + (x - y).abs()))
    ))
}

/// `‖R − R'‖_∞`.
pub fn reward_distance<T: Scalar>(r: &RewardTable<T>, prev: &RewardTable<T>) -> Result<T, ValidationError> {
    if r.num_states() != prev.num_states() || r.num_actions() != prev.num_actions() {
        return Err(ValidationError::DimensionMismatch {
            what: "reward",
            expected: prev.as_slice().len(),
            found: r.as_slice().len(),
        });
    }
    Ok(sup(r.as_slice().iter().zip(prev.as_slice()).map(|(&x, &y)| (x - y).abs())))
}

/// Per-step drift terms and their total `V_E`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetReport<T> {
    pub kernel_deltas: Vec<T>,
    pub reward_deltas: Vec<T>,
    pub total: T,
}

/// `V_E = Σ_{e=2}^{E} (‖P_e − P_{e−1}‖_{1,∞} + ‖R_e − R_{e−1}‖_∞)`.
pub fn variation_budget<T: Scalar>(seq: &EpisodeSequence<T>) -> BudgetReport<T> {
    budget_of(&seq.induced).expect("induced MDPs share dimensions")
}

/// [`variation_budget`] over an explicit list of MDPs.
pub fn budget_of<T: Scalar>(mdps: &[TabularMdp<T>]) -> Result<BudgetReport<T>, ValidationError> {
    let mut kernel_deltas = Vec::new();
    let mut reward_deltas = Vec::new();
    for w in mdps.windows(2) {
        kernel_deltas.push(kernel_distance(w[1].kernel(), w[0].kernel())?);
        reward_deltas.push(reward_distance(w[1].reward(), w[0].reward())?);
    }
    let total = kernel_deltas.iter().zip(&reward_deltas).fold(T::zero(), |acc, (&k, &r)| acc + k + r);
    Ok(BudgetReport { kernel_deltas, reward_deltas, total })
}

/// Search limits for enumeration and core mining.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub node_budget: usize,
    pub core_budget: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { node_budget: DEFAULT_NODE_BUDGET, core_budget: DEFAULT_CORE_BUDGET }
    }
}

/// Core of one episode, or the marker for an episode with no success.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpisodeCore {
    Core { core: CoreSet },
    NoSuccess,
}

impl EpisodeCore {
    pub fn core(&self) -> Option<&CoreSet> {
        match self {
            EpisodeCore::Core { core } => Some(core),
            EpisodeCore::NoSuccess => None,
        }
    }
}

fn core_or_marker(
    successes: &SuccessSet,
    phi: &Abstraction,
    strip_terminal: bool,
    limits: Limits,
) -> Result<EpisodeCore, Error> {
    if successes.is_empty() {
        return Ok(EpisodeCore::NoSuccess);
    }
    Ok(EpisodeCore::Core { core: core_with(successes, phi, strip_terminal, limits.core_budget)? })
}

fn episode_successes<T: Scalar>(seq: &EpisodeSequence<T>, limits: Limits) -> Result<Vec<SuccessSet>, Error> {
    seq.induced.iter().map(|m| enumerate_successes_with(m, limits.node_budget).map_err(Error::from)).collect()
}

/// `Core_φ(𝒮_e)` for every episode.
pub fn episode_cores<T: Scalar>(
    seq: &EpisodeSequence<T>,
    phi: &Abstraction,
    strip_terminal: bool,
    limits: Limits,
) -> Result<Vec<EpisodeCore>, Error> {
    episode_successes(seq, limits)?.iter().map(|s| core_or_marker(s, phi, strip_terminal, limits)).collect()
}

/// Core of the MDP induced by the full-support uniform peer: structure shared
/// by every success the joint kernel allows under any peer behaviour.
pub fn individual_core<T: Scalar>(
    game: &MarkovGame<T>,
    phi: &Abstraction,
    strip_terminal: bool,
    limits: Limits,
) -> Result<EpisodeCore, Error> {
    let peer = PeerPolicy::uniform("uniform", game.num_states(), game.num_actions_2());
    let m = induce_mdp(game, &peer)?;
    let successes = enumerate_successes_with(&m, limits.node_budget)?;
    core_or_marker(&successes, phi, strip_terminal, limits)
}

/// A prototype of `Core_e` absent from some success of episode `e+1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Prototype {
    pub prototype: Vec<Symbol>,
    /// A success of the other episode into whose image the prototype does not
    /// embed.
    pub witness: Trajectory,
    pub witness_image: Vec<Symbol>,
}

/// Comparison of consecutive episodes `e` and `e+1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepDrift {
    /// 1-based index of the earlier episode.
    pub from_episode: usize,
    /// Core over `𝒮_e ∪ 𝒮_{e+1}`: what all successes of both episodes share.
    pub common_core: EpisodeCore,
    /// Literal `Core_e ∩ Core_{e+1}` as sets of members.
    pub literal_intersection: Vec<Vec<Symbol>>,
    pub vanished: Vec<Prototype>,
    pub gained: Vec<Prototype>,
    /// Every member of `common_core` is covered by a member of the individual
    /// core. `None` when either side has no success.
    pub within_individual_core: Option<bool>,
}

/// Everything known about drift across an episode sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftReport<T> {
    pub alphabet: String,
    pub strip_terminal: bool,
    pub success_counts: Vec<usize>,
    pub cores: Vec<EpisodeCore>,
    pub steps: Vec<StepDrift>,
    pub individual_core: EpisodeCore,
    /// Peer the individual core is computed under; always `"uniform"`.
    pub individual_core_peer: &'static str,
    pub budget: BudgetReport<T>,
}

impl<T> DriftReport<T> {
    /// Every containment check that could run passed.
    pub fn containment_holds(&self) -> bool {
        self.steps.iter().all(|s| s.within_individual_core != Some(false))
    }

    pub fn any_vanished(&self) -> bool {
        self.steps.iter().any(|s| !s.vanished.is_empty())
    }
}

/// Members of `core` that fail to embed in some success of `other`, each with
/// the first such success as witness.
fn certified_absences(core: &EpisodeCore, other: &[(Trajectory, Vec<Symbol>)]) -> Vec<Prototype> {
    let Some(core) = core.core() else {
        return Vec::new();
    };
    core.members()
        .iter()
        .filter_map(|u| {
            other.iter().find(|(_, img)| !is_subsequence(u, img)).map(|(t, img)| Prototype {
                prototype: u.clone(),
                witness: t.clone(),
                witness_image: img.clone(),
            })
        })
        .collect()
}

fn images(successes: &SuccessSet, phi: &Abstraction) -> Result<Vec<(Trajectory, Vec<Symbol>)>, Error> {
    successes.iter().map(|t| Ok((t.clone(), apply_abstraction(t, phi)?))).collect()
}

/// Per-episode cores, consecutive common structure, certified vanished and
/// gained prototypes, the individual core and the variation budget.
pub fn drift_report<T: Scalar>(
    seq: &EpisodeSequence<T>,
    phi: &Abstraction,
    strip_terminal: bool,
    limits: Limits,
) -> Result<DriftReport<T>, Error> {
    let successes = episode_successes(seq, limits)?;
    let cores =
        successes.iter().map(|s| core_or_marker(s, phi, strip_terminal, limits)).collect::<Result<Vec<_>, _>>()?;
    let individual = individual_core(&seq.game, phi, strip_terminal, limits)?;
    let imgs = successes.iter().map(|s| images(s, phi)).collect::<Result<Vec<_>, _>>()?;

    let mut steps = Vec::new();
    for e in 0..seq.episodes().saturating_sub(1) {
        let union = successes[e].union(&successes[e + 1]);
        let common = core_or_marker(&union, phi, strip_terminal, limits)?;
        let literal = match (cores[e].core(), cores[e + 1].core()) {
            (Some(a), Some(b)) => a.intersection(b),
            _ => Vec::new(),
        };
        let within = match (&common, individual.core()) {
            (EpisodeCore::Core { core }, Some(ind)) => Some(core.members().iter().all(|m| ind.covers(m))),
            _ => None,
        };
        steps.push(StepDrift {
            from_episode: e + 1,
            common_core: common,
            literal_intersection: literal,
            vanished: certified_absences(&cores[e], &imgs[e + 1]),
            gained: certified_absences(&cores[e + 1], &imgs[e]),
            within_individual_core: within,
        });
    }

    Ok(DriftReport {
        alphabet: phi.label().to_string(),
        strip_terminal,
        success_counts: successes.iter().map(SuccessSet::len).collect(),
        cores,
        steps,
        individual_core: individual,
        individual_core_peer: "uniform",
        budget: variation_budget(seq),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel(rows: &[[f64; 2]]) -> Kernel<f64> {
        // rows indexed by state with a single action
        Kernel::from_fn(rows.len(), 1, |s, _, n| rows[s][n])
    }

    #[test]
    fn kernel_distance_examples() {
        let a = kernel(&[[1.0, 0.0], [0.0, 1.0]]);
        let b = kernel(&[[0.9, 0.1], [0.0, 1.0]]);
        let c = kernel(&[[0.0, 1.0], [0.0, 1.0]]);
        assert_eq!(kernel_distance(&a, &a).unwrap(), 0.0);
        assert!((kernel_distance(&b, &a).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(kernel_distance(&c, &a).unwrap(), 2.0);
    }

    #[test]
    fn kernel_distance_dimension_mismatch() {
        let a = kernel(&[[1.0, 0.0], [0.0, 1.0]]);
        let b = Kernel::from_fn(2, 2, |_, _, n| if n == 0 { 1.0 } else { 0.0 });
        assert!(matches!(kernel_distance(&a, &b), Err(ValidationError::DimensionMismatch { .. })));
    }

    #[test]
    fn reward_distance_examples() {
        let r = RewardTable::from_dense(2, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let one = RewardTable::from_dense(2, 2, vec![0.0, 1.5, 2.0, 3.0]).unwrap();
        let shifted = RewardTable::from_fn(2, 2, |s, a| r.get(s, a) - 0.75);
        assert_eq!(reward_distance(&r, &r).unwrap(), 0.0);
        assert_eq!(reward_distance(&one, &r).unwrap(), 0.5);
        assert_eq!(reward_distance(&shifted, &r).unwrap(), 0.75);
        let small = RewardTable::<f64>::zeros(1, 2);
        assert!(reward_distance(&small, &r).is_err());
    }

    #[test]
    fn single_episode_has_zero_budget() {
        let m =
            TabularMdp::new(kernel(&[[0.0, 1.0], [0.0, 1.0]]), RewardTable::zeros(2, 1), 2, [1], vec![1.0, 0.0], true)
                .unwrap();
        let b = budget_of(&[m]).unwrap();
        assert!(b.kernel_deltas.is_empty() && b.reward_deltas.is_empty());
        assert_eq!(b.total, 0.0);
    }
}
